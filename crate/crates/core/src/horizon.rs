//! Certified dominance horizons. From the eigenstructure of two strategies'
//! reduced matrices this derives constants (c, c̃, m) bounding survival mass
//! above and below, then the smallest T with T^|S|·(λ/λ′)^T < c̃/c, so the
//! spectrally better strategy's curve provably dominates for every t > T.
//! Every certificate is spot-checked against propagated curves before it is
//! issued.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evaluate::reach_curve;
use crate::evaluate::ReachCurve;
use crate::linalg;
use crate::mdp::{Mdp, Objective};
use crate::spectral::{self, ReducedMatrix};
use crate::strategy::{induced_matrix, StationaryStrategy};

/// Certificates whose T exceeds this cannot be spot-checked by propagation
/// and are refused rather than issued unverified.
const VERIFY_CAP: u64 = 200_000;

/// Eigenvector-matrix condition estimate above which the instance is treated
/// as non-diagonalizable and the Schur-form fallback constants apply.
const DIAG_COND_CAP: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct JordanConstants {
    pub c: f64,
    pub c_tilde: f64,
    pub m: u64,
    pub diagonalizable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonCertificate {
    pub sigma: String,
    pub sigma2: String,
    pub lambda2_pair: (f64, f64),
    pub c: f64,
    pub c_tilde: f64,
    pub m: u64,
    pub t_certified: u64,
    pub diagonalizable: bool,
    /// Initial states whose induced dynamics actually differ; dominance is
    /// claimed (and verified) from exactly these.
    pub initial_states: Vec<String>,
    pub verified_window: (u64, u64),
    pub verified: bool,
}

impl HorizonCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "sigma": self.sigma,
            "sigma2": self.sigma2,
            "lambda2_pair": [self.lambda2_pair.0, self.lambda2_pair.1],
            "c": self.c,
            "c_tilde": self.c_tilde,
            "m": self.m,
            "T": self.t_certified,
            "diagonalizable": self.diagonalizable,
            "initial_states": self.initial_states,
            "verified_window": [self.verified_window.0, self.verified_window.1],
            "verified": self.verified,
        })
    }

    pub fn from_json(value: &Value) -> Result<HorizonCertificate> {
        let bad = |what: &str| Error::Parse {
            context: "certificate json".into(),
            detail: format!("missing or malformed field {what}"),
        };
        let get = |key: &str| value.get(key).ok_or_else(|| bad(key));
        let f = |key: &str| get(key).and_then(|v| v.as_f64().ok_or_else(|| bad(key)));
        let u = |key: &str| get(key).and_then(|v| v.as_u64().ok_or_else(|| bad(key)));
        let s = |key: &str| {
            get(key).and_then(|v| v.as_str().map(str::to_string).ok_or_else(|| bad(key)))
        };
        let pair = get("lambda2_pair")?
            .as_array()
            .filter(|a| a.len() == 2)
            .and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)))
            .ok_or_else(|| bad("lambda2_pair"))?;
        let window = get("verified_window")?
            .as_array()
            .filter(|a| a.len() == 2)
            .and_then(|a| Some((a[0].as_u64()?, a[1].as_u64()?)))
            .ok_or_else(|| bad("verified_window"))?;
        let initial_states = get("initial_states")?
            .as_array()
            .map(|a| {
                a.iter()
                    .map(|v| v.as_str().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
            })
            .ok_or_else(|| bad("initial_states"))?
            .ok_or_else(|| bad("initial_states"))?;
        Ok(HorizonCertificate {
            sigma: s("sigma")?,
            sigma2: s("sigma2")?,
            lambda2_pair: pair,
            c: f("c")?,
            c_tilde: f("c_tilde")?,
            m: u("m")?,
            t_certified: u("T")?,
            diagonalizable: get("diagonalizable")?
                .as_bool()
                .ok_or_else(|| bad("diagonalizable"))?,
            initial_states,
            verified_window: window,
            verified: get("verified")?.as_bool().ok_or_else(|| bad("verified"))?,
        })
    }
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// Perron data with w rescaled so wᵀv = 1; products v(s)·w(z) are then
// invariant under the iteration's own normalization.
fn perron_pair(m: &DMatrix<f64>) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let right = linalg::perron_root(m)?;
    let left = linalg::perron_root(&m.transpose())?;
    let mut w: Vec<f64> = left.vector.iter().copied().collect();
    let v: Vec<f64> = right.vector.iter().copied().collect();
    let scale: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
    if scale <= 0.0 {
        return Err(Error::NonGeneric(
            "left/right eigenvector product is not positive".into(),
        ));
    }
    for x in &mut w {
        *x /= scale;
    }
    Ok((right.root, v, w))
}

// Smallest t ≥ 1 with κ·t^d·r^t ≤ target for ALL t' ≥ t. For d > 0 the left
// side is unimodal, so only t past its peak qualifies unless the peak itself
// is under the target.
fn remainder_horizon(kappa: f64, d: u32, r: f64, target: f64) -> Result<u64> {
    if kappa <= target || r <= 0.0 {
        return Ok(1);
    }
    let ln_r = r.ln();
    let lhs = |t: f64| kappa.ln() + f64::from(d) * t.ln() + t * ln_r;
    let ln_target = target.ln();
    if d == 0 {
        let mut t = ((ln_target - kappa.ln()) / ln_r).ceil().max(1.0) as u64;
        while lhs(t as f64) > ln_target {
            t += 1;
            if t > 1_000_000_000_000 {
                return Err(Error::Domain(
                    "remainder constants give an impractically large horizon".into(),
                ));
            }
        }
        Ok(t)
    } else {
        let peak = (f64::from(d) / -ln_r).ceil().max(1.0);
        if lhs(peak) <= ln_target {
            return Ok(1);
        }
        let mut hi = peak;
        while lhs(hi) > ln_target {
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::Domain(
                    "remainder constants give an impractically large horizon".into(),
                ));
            }
        }
        let (mut lo, mut hi) = (peak as u64, hi.ceil() as u64);
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if lhs(mid as f64) <= ln_target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Constants from the eigendecomposition M = V·D·V⁻¹ of a strictly positive
/// matrix with Perron root ρ: Mᵗ(s,z) ≤ c·ρᵗ entrywise, Mᵗ(s,z) ≥ c̃·ρᵗ for
/// every t ≥ m.
pub fn jordan_constants(reduced: &ReducedMatrix) -> Result<JordanConstants> {
    let m = &reduced.matrix;
    let n = m.nrows();
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    if m.iter().any(|&x| x <= 0.0) {
        return Err(Error::Domain(
            "jordan constants require a strictly positive matrix".into(),
        ));
    }
    if n == 1 {
        return Ok(JordanConstants {
            c: 1.0,
            c_tilde: 0.5,
            m: 1,
            diagonalizable: true,
        });
    }

    let eig = linalg::eigen(m)?;
    let rho_c = eig.values[0];
    if rho_c.im.abs() > 1e-10 * rho_c.re.abs() || rho_c.re <= 0.0 {
        return Err(Error::NonGeneric("dominant eigenvalue is not real positive".into()));
    }
    let rho = rho_c.re;
    let mu = eig.values[1].norm();
    if mu >= rho - 1e-8 {
        return Err(Error::NonGeneric("repeated dominant eigenvalue".into()));
    }

    let (_, v, w) = perron_pair(m)?;
    let min_vw = v
        .iter()
        .flat_map(|&a| w.iter().map(move |&b| a * b))
        .fold(f64::INFINITY, f64::min);
    if !(min_vw > 0.0) {
        return Err(Error::NonGeneric("Perron vectors are not strictly positive".into()));
    }
    let c_tilde = 0.5 * min_vw;

    let vmat = &eig.vectors;
    let inverted = linalg::invert_complex(vmat)
        .ok()
        .filter(|vinv| frobenius_c(vmat) * frobenius_c(vinv) <= DIAG_COND_CAP);
    match inverted {
        Some(vinv) => {
            let mut c = 0.0f64;
            let mut kappa = 0.0f64;
            for s in 0..n {
                for z in 0..n {
                    let full: f64 = (0..n)
                        .map(|i| vmat[(s, i)].norm() * vinv[(i, z)].norm())
                        .sum();
                    let rest: f64 = (1..n)
                        .map(|i| vmat[(s, i)].norm() * vinv[(i, z)].norm())
                        .sum();
                    c = c.max(full);
                    kappa = kappa.max(rest);
                }
            }
            let m_steps = remainder_horizon(kappa, 0, mu / rho, c_tilde)?;
            Ok(JordanConstants {
                c,
                c_tilde,
                m: m_steps,
                diagonalizable: true,
            })
        }
        None => fallback_constants(m, &eig.values, rho, mu, &v, &w, c_tilde),
    }
}

fn frobenius_c(m: &DMatrix<num_complex::Complex64>) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

// Schur-form bounds when the eigenvector matrix is unusable: with nilpotent
// mass ‖N‖_F² = ‖M‖_F² − Σ|λᵢ|², powers obey ‖Mᵗ‖ ≤ n·max(1, ‖N‖_F/ρ)^{n−1}
// ·t^{n−1}·ρᵗ; the same shape bounds the deflated remainder for m.
fn fallback_constants(
    m: &DMatrix<f64>,
    values: &[num_complex::Complex64],
    rho: f64,
    mu: f64,
    v: &[f64],
    w: &[f64],
    c_tilde: f64,
) -> Result<JordanConstants> {
    let n = m.nrows();
    let sum_sq: f64 = values.iter().map(|l| l.norm_sqr()).sum();
    let nf = (frobenius(m).powi(2) - sum_sq).max(0.0).sqrt();
    let c = n as f64 * (nf / rho).max(1.0).powi(n as i32 - 1);

    let mut deflated = m.clone();
    for s in 0..n {
        for z in 0..n {
            deflated[(s, z)] -= rho * v[s] * w[z];
        }
    }
    let m_steps = if mu <= 1e-300 {
        if frobenius(&deflated) <= 1e-12 * rho {
            1
        } else {
            n as u64
        }
    } else {
        let rest_sq: f64 = values.iter().skip(1).map(|l| l.norm_sqr()).sum();
        let nf_rest = (frobenius(&deflated).powi(2) - rest_sq).max(0.0).sqrt();
        let c_n = (n as f64).powf(1.5) * (nf_rest / mu).max(1.0).powi(n as i32 - 1);
        remainder_horizon(c_n, n as u32 - 1, mu / rho, c_tilde)?
    };
    Ok(JordanConstants {
        c,
        c_tilde,
        m: m_steps,
        diagonalizable: false,
    })
}

// Row-scoped survival constants: bounds on the row sum Σ_z Mᵗ(row0, z)
// rather than on single entries. These stay positive on reducible induced
// chains, where the entrywise minimum v(s)w(z) collapses to zero.
struct UpperRow {
    rho: f64,
    c: f64,
    poly: u32,
    diagonalizable: bool,
}

struct LowerRow {
    rho: f64,
    c_tilde: f64,
    m: u64,
    diagonalizable: bool,
}

fn upper_row_constants(sub: &DMatrix<f64>, row: usize) -> Result<UpperRow> {
    let n = sub.nrows();
    if n == 1 {
        return Ok(UpperRow {
            rho: sub[(0, 0)].max(0.0),
            c: 1.0,
            poly: 0,
            diagonalizable: true,
        });
    }
    let eig = linalg::eigen(sub)?;
    let rho = eig.values[0].re.max(0.0);
    if rho <= 1e-12 {
        // Nilpotent branch: survival dies out within n steps.
        return Ok(UpperRow {
            rho: 0.0,
            c: 1.0,
            poly: 0,
            diagonalizable: true,
        });
    }
    let vmat = &eig.vectors;
    let inverted = linalg::invert_complex(vmat)
        .ok()
        .filter(|vinv| frobenius_c(vmat) * frobenius_c(vinv) <= DIAG_COND_CAP);
    match inverted {
        Some(vinv) => {
            let c = (0..n)
                .map(|i| {
                    let row_l1: f64 = (0..n).map(|z| vinv[(i, z)].norm()).sum();
                    vmat[(row, i)].norm() * row_l1
                })
                .sum();
            Ok(UpperRow {
                rho,
                c,
                poly: 0,
                diagonalizable: true,
            })
        }
        None => {
            let sum_sq: f64 = eig.values.iter().map(|l| l.norm_sqr()).sum();
            let nf = (frobenius(sub).powi(2) - sum_sq).max(0.0).sqrt();
            let c = (n as f64).powf(1.5) * (nf / rho).max(1.0).powi(n as i32 - 1);
            Ok(UpperRow {
                rho,
                c,
                poly: n as u32 - 1,
                diagonalizable: false,
            })
        }
    }
}

fn lower_row_constants(sub: &DMatrix<f64>, row: usize) -> Result<LowerRow> {
    let n = sub.nrows();
    if n == 1 {
        let rho = sub[(0, 0)];
        if rho <= 1e-12 {
            return Err(Error::NonGeneric(
                "reference branch absorbs surely; no spectral lower bound".into(),
            ));
        }
        return Ok(LowerRow {
            rho,
            c_tilde: 0.5,
            m: 1,
            diagonalizable: true,
        });
    }
    let eig = linalg::eigen(sub)?;
    let rho_c = eig.values[0];
    if rho_c.im.abs() > 1e-10 * rho_c.re.abs() || rho_c.re <= 1e-12 {
        return Err(Error::NonGeneric(
            "reference branch has no positive dominant eigenvalue".into(),
        ));
    }
    let rho = rho_c.re;
    let mu = eig.values[1].norm();
    if mu >= rho - 1e-8 {
        return Err(Error::NonGeneric(
            "repeated dominant eigenvalue on the reference branch".into(),
        ));
    }
    let (_, v, w) = perron_pair(sub)?;
    let weight = v[row] * w.iter().sum::<f64>();
    if !(weight > 0.0) {
        return Err(Error::NonGeneric(
            "initial state carries no Perron mass on the reference branch".into(),
        ));
    }
    let c_tilde = 0.5 * weight;

    let vmat = &eig.vectors;
    let inverted = linalg::invert_complex(vmat)
        .ok()
        .filter(|vinv| frobenius_c(vmat) * frobenius_c(vinv) <= DIAG_COND_CAP);
    let (m, diagonalizable) = match inverted {
        Some(vinv) => {
            let kappa: f64 = (1..n)
                .map(|i| {
                    let row_l1: f64 = (0..n).map(|z| vinv[(i, z)].norm()).sum();
                    vmat[(row, i)].norm() * row_l1
                })
                .sum();
            (remainder_horizon(kappa, 0, mu / rho, c_tilde)?, true)
        }
        None => {
            let mut deflated = sub.clone();
            for s in 0..n {
                for z in 0..n {
                    deflated[(s, z)] -= rho * v[s] * w[z];
                }
            }
            let m = if mu <= 1e-300 {
                if frobenius(&deflated) <= 1e-12 * rho {
                    1
                } else {
                    n as u64
                }
            } else {
                let rest_sq: f64 = eig.values.iter().skip(1).map(|l| l.norm_sqr()).sum();
                let nf_rest = (frobenius(&deflated).powi(2) - rest_sq).max(0.0).sqrt();
                let c_n = (n as f64).powf(1.5) * (nf_rest / mu).max(1.0).powi(n as i32 - 1);
                remainder_horizon(c_n, n as u32 - 1, mu / rho, c_tilde)?
            };
            (m, false)
        }
    };
    Ok(LowerRow {
        rho,
        c_tilde,
        m,
        diagonalizable,
    })
}

// Smallest T ≥ floor with T^s_pow · r^T < rhs. The log of the left side is
// concave, so below its peak the predicate can only hold at the floor
// itself; past the peak a doubling-plus-bisection search is exact.
fn smallest_certified_t(floor: u64, s_pow: u32, r: f64, rhs: f64) -> Result<u64> {
    let floor = floor.max(1);
    if !(r > 0.0 && r < 1.0 && rhs > 0.0) {
        return Err(Error::Domain(format!(
            "certificate inequality needs 0 < ratio < 1 and positive slack, got ratio {r}, slack {rhs}"
        )));
    }
    let ln_r = r.ln();
    let ln_rhs = rhs.ln();
    let lhs = |t: f64| f64::from(s_pow) * t.ln() + t * ln_r;
    if lhs(floor as f64) < ln_rhs {
        return Ok(floor);
    }
    let peak = (f64::from(s_pow) / -ln_r).ceil().max(floor as f64);
    let mut hi = peak.max(1.0);
    while lhs(hi) >= ln_rhs {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::Domain(
                "certified horizon overflows practical bounds".into(),
            ));
        }
    }
    let (mut lo, mut hi) = (peak as u64, hi.ceil() as u64);
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if lhs(mid as f64) < ln_rhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn reachable_non_target(p: &DMatrix<f64>, s0: usize, target: usize) -> Vec<usize> {
    let n = p.nrows();
    let mut seen = vec![false; n];
    seen[s0] = true;
    let mut stack = vec![s0];
    while let Some(u) = stack.pop() {
        if u == target {
            continue;
        }
        for z in 0..n {
            if p[(u, z)] > 0.0 && !seen[z] {
                seen[z] = true;
                stack.push(z);
            }
        }
    }
    (0..n).filter(|&s| seen[s] && s != target).collect()
}

fn submatrix(p: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    let k = keep.len();
    DMatrix::from_fn(k, k, |i, j| p[(keep[i], keep[j])])
}

/// Certifies a horizon T such that sigma's curve strictly dominates sigma2's
/// for every t > T, from every initial state where the two strategies induce
/// different dynamics. Spot-checks [T, T+50] by direct propagation before
/// issuing; a failed check is an error carrying the unverified certificate.
pub fn certified_horizon(
    mdp: &Mdp,
    sigma: &StationaryStrategy,
    sigma2: &StationaryStrategy,
) -> Result<HorizonCertificate> {
    let lam = spectral::lambda2(mdp, sigma)?;
    let lam2 = spectral::lambda2(mdp, sigma2)?;
    let gap_ok = match mdp.objective() {
        Objective::Reach => lam < lam2 - 1e-9,
        Objective::Safety => lam > lam2 + 1e-9,
    };
    if !gap_ok {
        return Err(Error::Domain(format!(
            "spectral tie: λ2 = {lam:.17e} vs {lam2:.17e}; no certificate"
        )));
    }

    let p1 = induced_matrix(mdp, sigma);
    let p2 = induced_matrix(mdp, sigma2);
    let target = mdp.target();

    let mut scope = Vec::new();
    let mut scope_sets: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for s0 in mdp.non_target_states() {
        let r1 = reachable_non_target(&p1.matrix, s0, target);
        let r2 = reachable_non_target(&p2.matrix, s0, target);
        let mut union = r1.clone();
        union.extend(r2.iter().copied().filter(|s| !r1.contains(s)));
        let differs = union.iter().any(|&u| {
            (0..mdp.n_states()).any(|z| (p1.matrix[(u, z)] - p2.matrix[(u, z)]).abs() > 1e-12)
        });
        if differs {
            scope.push(s0);
            scope_sets.push((r1, r2));
        }
    }
    if scope.is_empty() {
        return Err(Error::Domain(
            "strategies induce identical dynamics from every initial state".into(),
        ));
    }

    // Reach wants sigma's survival bounded above; Safety bounds sigma2's.
    let reach = mdp.objective() == Objective::Reach;
    let s_pow = mdp.n_states() as u32;

    let mut t_all = 0u64;
    let mut m_all = 0u64;
    let mut c_all = 0.0f64;
    let mut ct_all = f64::INFINITY;
    let mut diagonalizable = true;
    for (&s0, (r1, r2)) in scope.iter().zip(&scope_sets) {
        let (upper_p, upper_keep, lower_p, lower_keep) = if reach {
            (&p1, r1, &p2, r2)
        } else {
            (&p2, r2, &p1, r1)
        };
        let upper_sub = submatrix(&upper_p.matrix, upper_keep);
        let lower_sub = submatrix(&lower_p.matrix, lower_keep);
        let upper_row = upper_keep.iter().position(|&s| s == s0).unwrap();
        let lower_row = lower_keep.iter().position(|&s| s == s0).unwrap();
        let up = upper_row_constants(&upper_sub, upper_row)?;
        let low = lower_row_constants(&lower_sub, lower_row)?;

        let t_branch = if up.rho <= 0.0 {
            low.m.max(upper_sub.nrows() as u64 + 1)
        } else {
            let r = up.rho / low.rho;
            if r >= 1.0 - 1e-12 {
                return Err(Error::Domain(format!(
                    "spectral tie from initial state {}: branch roots {:.17e} vs {:.17e}",
                    mdp.state_name(s0),
                    up.rho,
                    low.rho
                )));
            }
            // A polynomial in the upper bound forces T past its peak so the
            // bound is monotone over [T, ∞).
            let mut floor = low.m;
            if up.poly > 0 {
                floor = floor.max((f64::from(up.poly) / -r.ln()).ceil() as u64);
            }
            smallest_certified_t(floor, s_pow, r, low.c_tilde / up.c)?
        };
        t_all = t_all.max(t_branch);
        m_all = m_all.max(low.m);
        c_all = c_all.max(up.c);
        ct_all = ct_all.min(low.c_tilde);
        diagonalizable &= up.diagonalizable && low.diagonalizable;
    }

    if t_all > VERIFY_CAP {
        return Err(Error::Domain(format!(
            "certified horizon {t_all} exceeds the verification cap {VERIFY_CAP}"
        )));
    }

    let window = (t_all, t_all + 50);
    let mut certificate = HorizonCertificate {
        sigma: sigma.profile_string(mdp),
        sigma2: sigma2.profile_string(mdp),
        lambda2_pair: (lam, lam2),
        c: c_all,
        c_tilde: ct_all,
        m: m_all,
        t_certified: t_all,
        diagonalizable,
        initial_states: scope.iter().map(|&s| mdp.state_name(s).to_string()).collect(),
        verified_window: window,
        verified: false,
    };

    let t_max = (t_all + 50) as usize;
    for &s0 in &scope {
        let curve1 = reach_curve(mdp, sigma, s0, t_max)?;
        let curve2 = reach_curve(mdp, sigma2, s0, t_max)?;
        for t in (t_all.max(2) as usize)..=t_max {
            let (a, b) = (curve1.log_survival_at(t), curve2.log_survival_at(t));
            let holds = if reach { a < b } else { a > b };
            if !holds {
                return Err(Error::CertificateVerification {
                    certificate: Box::new(certificate),
                    period: t as u64,
                });
            }
        }
    }
    certificate.verified = true;
    Ok(certificate)
}

/// Smallest T0 with the signed curve difference strictly favorable to A at
/// every t in [T0, horizon]; None when the final period is not favorable.
/// Comparison is in log-survival, which stays strict long after the raw
/// values saturate at 1.
pub fn empirical_crossover(
    curve_a: &ReachCurve,
    curve_b: &ReachCurve,
    objective: Objective,
) -> Result<Option<usize>> {
    if curve_a.initial != curve_b.initial {
        return Err(Error::Domain(format!(
            "curves start from different states: {} vs {}",
            curve_a.initial, curve_b.initial
        )));
    }
    if curve_a.horizon() != curve_b.horizon() {
        return Err(Error::Domain(format!(
            "curves have different horizons: {} vs {}",
            curve_a.horizon(),
            curve_b.horizon()
        )));
    }
    let h = curve_a.horizon();
    if h == 0 {
        return Ok(None);
    }
    let favored = |t: usize| {
        let (a, b) = (curve_a.log_survival_at(t), curve_b.log_survival_at(t));
        match objective {
            Objective::Reach => a < b,
            Objective::Safety => a > b,
        }
    };
    if !favored(h) {
        return Ok(None);
    }
    let mut t0 = h;
    while t0 > 1 && favored(t0 - 1) {
        t0 -= 1;
    }
    Ok(Some(t0))
}
