//! The superconvergent normal-form iteration.
//!
//! Each step conjugates the Hamiltonian by the exponential of a generator
//! solving the homological equation against the current effective frequency,
//! absorbing the normal part into an energy constant and a frequency update
//! and parking the action-quadratic remainder. The perturbation's formal
//! order doubles every step.
//!
//! Bookkeeping is graded: symbols never store the perturbation strength;
//! they are keyed by formal order, and a step processes every order in the
//! block `[2^{p-1}, 2^p)` so that, after step `p`, the surviving content
//! provably starts at order `2^p` — the order-doubling ladder is exact at
//! the symbol level, not a numerical observation. Divisors for the solves
//! are the effective frequency evaluated at the run's nominal perturbation
//! strength (and a configurable parameter point, default zero, for the
//! semiclassical corrections); set the nominal strength to zero to run the
//! iteration as a purely formal order-by-order expansion.

mod graded;
mod run;
mod schedule;
mod step;

pub use graded::EpsGraded;
pub use run::{
    predict_level, predict_level_exact, remainder_eval, run, ConvergenceCertificate,
    EngineConfig, IterationState, RemainderEntry, ResidualRecord,
};
pub use schedule::{
    epsilon_star, schedule, theoretical_norm_bound, theoretical_norm_bound_recurrence,
    ScheduleParams,
};

pub use crate::symbol::BracketMode as Mode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("small-divisor budget exhausted at step {p} (gamma_p = {gamma:.6e})")]
    GammaExhausted { p: u32, gamma: f64 },
    #[error("truncation overflow at step {p}: dropped mass {dropped:.3e} vs residual {kept:.3e}")]
    TruncationOverflow { p: u32, dropped: f64, kept: f64 },
    #[error("perturbation must be real and vanish to second order at the origin")]
    InvalidPerturbation,
    #[error("base frequency fails the diophantine check at k = {k:?}")]
    DiophantineFailed { k: Vec<i64> },
    #[error("level outside the locality window: |alpha| hbar = {val:.4} >= eta = {eta:.4}")]
    LocalityWindow { val: f64, eta: f64 },
    #[error(transparent)]
    Symbol(#[from] crate::symbol::SymbolError),
    #[error(transparent)]
    Quantize(#[from] crate::quantize::QuantizeError),
}
