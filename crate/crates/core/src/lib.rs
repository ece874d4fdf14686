//! Analysis toolkit for Markov decision processes with an absorbing target
//! state, under reachability ("hit the target") and safety ("avoid the
//! target") objectives.
//!
//! The crate is organised around a few core questions about stationary and
//! Markov strategies:
//!
//! - how fast does the probability of having reached the target grow with the
//!   horizon (reach curves, hitting probabilities, discounted values);
//! - when does one strategy overtake another, i.e. dominate it at every
//!   sufficiently late period (finite-window verdicts in [`evaluate`],
//!   spectral-gap orderings in [`spectral`]);
//! - for deterministic MDPs, which pure stationary policy survives the
//!   Blackwell (discount-robust) criterion after a log transform to an
//!   average-payoff problem ([`blackwell`]);
//! - from which explicit period onward a spectral-gap ordering is guaranteed
//!   to show up in the curves themselves ([`horizon`]).
//!
//! [`casebook`] builds the small worked examples used throughout the test
//! suite and re-checks their documented properties end to end.

pub mod blackwell;
pub mod casebook;
pub mod error;
pub mod evaluate;
pub mod horizon;
pub mod linalg;
pub mod mdp;
pub mod spectral;
pub mod strategy;

pub use error::{Error, Result};
pub use mdp::{Mdp, Objective, ValidationReport};
pub use strategy::{MarkovPlan, StationaryStrategy, TransitionMatrix};
