//! Shared error type. Operations that can reject their input return
//! [`Result`]; validation itself never fails and reports through
//! [`crate::mdp::ValidationReport`] instead.

use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The MDP failed validation; `issues` mirrors the validation report.
    #[error("invalid MDP: {}", issues.join("; "))]
    InvalidMdp { issues: Vec<String> },

    /// Malformed document (JSON or CSV). `context` names the file or field.
    #[error("{context}: {detail}")]
    Parse { context: String, detail: String },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown action `{action}` in state `{state}`")]
    UnknownAction { state: String, action: String },

    /// Argument outside its documented range (discount factor, window,
    /// horizon, probability, grid size, ...).
    #[error("{0}")]
    Domain(String),

    #[error("enumeration would produce {count} pure stationary strategies, over the cap of {cap}")]
    StrategyCap { count: u128, cap: u64 },

    #[error("{count} pure action paths to the requested depth, over the cap of {cap}")]
    PathCap { count: u128, cap: u64 },

    /// The QR iteration did not converge. Eigenvalues extracted so far are
    /// attached so callers can inspect the partial spectrum.
    #[error("eigenvalue iteration did not converge; {} of {dim} eigenvalues extracted", partial.len())]
    EigenNonConvergence { dim: usize, partial: Vec<Complex64> },

    /// The two independent routes to the dominant eigenvalue disagree, which
    /// signals a conditioning problem rather than a usable answer.
    #[error("dominant-eigenvalue routes disagree: power iteration {power:.17e} vs QR {qr:.17e}")]
    SpectralRouteMismatch { power: f64, qr: f64 },

    /// Inputs to the one-row mixing scan differ in more rows than the
    /// monotonicity argument covers; mixing such matrices can move the
    /// dominant root below both endpoints.
    #[error("matrices differ in {rows} rows; the one-row mixing argument does not apply")]
    MixRowsDiffer { rows: usize },

    #[error("non-deterministic transitions at {}", pairs.iter().map(|(s, a)| format!("({s}, {a})")).collect::<Vec<_>>().join(", "))]
    NonDeterministic { pairs: Vec<(String, String)> },

    #[error("normalization removed every non-target state")]
    NormalizeEmptied,

    #[error("policy iteration did not stabilise across the discount grid; exact arithmetic may be required")]
    BlackwellUnstable,

    /// The instance violates a genericity assumption (repeated dominant
    /// eigenvalue, vanishing spectral gap, degenerate constants).
    #[error("non-generic instance: {0}")]
    NonGeneric(String),

    /// The certified horizon failed its empirical spot check; this signals a
    /// constants bug, never a tolerable condition.
    #[error("certificate failed empirical verification at period {period}")]
    CertificateVerification {
        certificate: Box<crate::horizon::HorizonCertificate>,
        period: u64,
    },
}
