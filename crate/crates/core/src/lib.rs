//! Exact normal-form machinery for perturbed harmonic oscillators.
//!
//! The crate is organized around five subsystems:
//!
//! - [`symbol`]: exact algebra of polynomial phase-space symbols in a
//!   complexified oscillator frame — torus-action decomposition, Poisson and
//!   Moyal brackets, the homological equation, Lie transforms.
//! - [`dioph`]: diophantine frequency verification, resonance-zone measures,
//!   and the shrinking small-divisor budget of the iteration.
//! - [`engine`]: the superconvergent normal-form iteration itself, in
//!   classical (Poisson) and quantum (Moyal) modes, with parameter schedules,
//!   norm-bound ledgers and a convergence certificate.
//! - [`quantize`]: Weyl/anti-Wick quantization via the heat semigroup,
//!   Bargmann-calibrated Toeplitz matrix elements, assembly and
//!   diagonalization of truncated Hamiltonians, spectral matching.
//! - [`norms`]: weighted analytic norms on the polynomial-times-Gaussian
//!   class, with quadrature-backed verification of the bracket and
//!   homological-solution estimates.
//!
//! All symbol coefficients are exact complex rationals carrying polynomial
//! dependence on the semiclassical parameter, so algebraic identities
//! (bracket antisymmetry, residual of the homological equation, torus-action
//! reconstruction) hold exactly, not up to tolerance. Floating point enters
//! only at reporting boundaries: norm quadrature, eigensolves, slope fits.

pub mod dioph;
pub mod engine;
pub mod fit;
pub mod norms;
pub mod num;
pub mod quantize;
pub mod symbol;

pub use dioph::{ExcisionReport, FrequencyVector};
pub use engine::{ConvergenceCertificate, EngineConfig, IterationState, Mode, ScheduleParams};
pub use num::{CRat, HPoly, Rat};
pub use quantize::{OperatorMatrix, SpectralReport};
pub use symbol::{Frame, Monomial, NormalDecomposition, PolySymbol};
