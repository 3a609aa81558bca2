//! Quantization and spectral verification.
//!
//! Operators are built in the Bargmann representation: the oscillator
//! eigenstates are normalized holomorphic monomials, multiplication-then-
//! projection gives Toeplitz (anti-Wick) matrix elements in closed form via
//! Gaussian moments, and symmetric (Weyl) quantization is reached by running
//! the heat semigroup backwards on the symbol. The per-mode Bargmann variable
//! is calibrated once so that the oscillator symbol quantizes to the exact
//! diagonal `hbar <omega, alpha + 1/2>`; that single invariant pins every
//! normalization in the module, and an independent ladder-operator
//! symmetrization route cross-checks low-degree matrix elements.
//!
//! Matrix entries are products of per-mode one-dimensional elements, so
//! multi-mode assembly never performs numerical quadrature. Diagonals of
//! angular-index-zero symbols are exact rational polynomials in the
//! semiclassical parameter; the dense matrices hand floating point to the
//! eigensolver only at the end.

mod heat;
mod ladder;
mod matrix;
mod spectral;

pub use heat::{calibrated_laplacian, heat_flow, weyl_from_antiwick_truncated, HeatTime};
pub use ladder::weyl_ladder_matrix;
pub use matrix::{
    assemble_hamiltonian, operator_norm, spectrum, toeplitz_diagonal_exact,
    toeplitz_matrix_elements, weyl_diagonal_exact, weyl_matrix_elements, OperatorMatrix,
};
pub use spectral::{
    antiwick_remainder_norm, match_spectrum, prop_a1_scaling, MatchRow, PredictedLevel,
    PropA1Row, PropA1Table, SpectralReport,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NonHermitian(f64),
    #[error("symbol must vanish to order {required} at the origin (found {found})")]
    VanishingOrder { required: u32, found: u32 },
    #[error("basis cutoff must be positive in every mode")]
    BadCutoff,
    #[error("level multi-index {0:?} outside the basis cutoff")]
    LevelOutOfRange(Vec<usize>),
    #[error("ambiguous spectral match near eigenvalue {eig:.12e}")]
    AmbiguousMatch { eig: f64 },
    #[error(transparent)]
    Symbol(#[from] crate::symbol::SymbolError),
}
