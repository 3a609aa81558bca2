//! Exact algebra of polynomial phase-space symbols.
//!
//! Symbols live in a complexified frame tied once and for all to the base
//! frequency vector: per mode, `z_k = omega_k * x_k + i * xi_k`. The
//! oscillator flow acts on monomials `z^m zbar^n` as a torus rotation with
//! angular index `k = n - m`, which makes the homological equation diagonal.
//! Coefficients are polynomials in the semiclassical parameter with exact
//! complex-rational coefficients, so bracket identities and the residual of
//! the homological equation are checked exactly, term by term.
//!
//! Frequency updates produced by the normal-form iteration are carried as
//! action-term coefficients; the frame itself never changes.

mod bracket;
mod homological;
mod lie;
mod normal;
mod poly;
mod serial;

pub use bracket::{moyal_bracket, poisson_bracket};
pub use homological::{homological_residual, solve_homological, HomologicalSolution};
pub use lie::{lie_transform, BracketMode};
pub use normal::{decompose_normal, recompose_normal, NormalDecomposition};
pub use poly::{real_pair, PolySymbol, TruncationLedger};
pub use serial::{SymbolRepr, TermRepr};

use crate::num::Rat;
use num_traits::Zero;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("frame mismatch: operands carry different base frequencies")]
    FrameMismatch,
    #[error("degree cap mismatch: {0} vs {1}")]
    DegreeCapMismatch(u32, u32),
    #[error("zero divisor at angular index {0:?}")]
    ZeroDivisor(Vec<i64>),
    #[error("input has angular index {0:?} != 0; not a normal symbol")]
    NonNormalInput(Vec<i64>),
    #[error("Lie series did not terminate within {max_r} brackets (residual mass {mass:.3e})")]
    NonTerminatingSeries { max_r: u32, mass: f64 },
    #[error("invalid frame: frequencies must satisfy 0 < omega_k <= 1")]
    InvalidFrame,
    #[error("symbol deserialization: {0}")]
    BadRepr(String),
}

/// Base frequency frame defining the complexification `z_k = w_k x_k + i xi_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    omega: Arc<Vec<Rat>>,
}

impl Frame {
    pub fn new(omega: Vec<Rat>) -> Result<Self, SymbolError> {
        if omega.is_empty()
            || omega
                .iter()
                .any(|w| w <= &Rat::zero() || w > &Rat::from_integer(1.into()))
        {
            return Err(SymbolError::InvalidFrame);
        }
        Ok(Frame {
            omega: Arc::new(omega),
        })
    }

    /// Unit-frequency frame in `l` degrees of freedom.
    pub fn unit(l: usize) -> Self {
        Frame::new(vec![Rat::from_integer(1.into()); l]).unwrap()
    }

    pub fn l(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[Rat] {
        &self.omega
    }
}

/// Monomial `z^m zbar^n` in the frame coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub m: Vec<u8>,
    pub n: Vec<u8>,
}

impl Monomial {
    pub fn new(m: Vec<u8>, n: Vec<u8>) -> Self {
        debug_assert_eq!(m.len(), n.len());
        Monomial { m, n }
    }

    pub fn unit(l: usize) -> Self {
        Monomial {
            m: vec![0; l],
            n: vec![0; l],
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.m.iter().chain(self.n.iter()).map(|&e| e as u32).sum()
    }

    /// Angular index of the torus action: `k = n - m`.
    pub fn angular_index(&self) -> Vec<i64> {
        self.m
            .iter()
            .zip(self.n.iter())
            .map(|(&m, &n)| n as i64 - m as i64)
            .collect()
    }

    /// True when the monomial is a function of the actions alone.
    pub fn is_action(&self) -> bool {
        self.m == self.n
    }

    /// Conjugate monomial (m and n swapped).
    pub fn conj(&self) -> Monomial {
        Monomial {
            m: self.n.clone(),
            n: self.m.clone(),
        }
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^{:?} zb^{:?}", self.m, self.n)
    }
}

/// l1 length of an angular index.
pub fn k_norm(k: &[i64]) -> u64 {
    k.iter().map(|v| v.unsigned_abs()).sum()
}

/// Exact inner product of a rational frequency vector with an integer vector.
pub fn omega_dot_k(omega: &[Rat], k: &[i64]) -> Rat {
    omega
        .iter()
        .zip(k.iter())
        .map(|(w, &ki)| w * Rat::from_integer(ki.into()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn angular_index_examples() {
        // action-invariant monomial
        let mono = Monomial::new(vec![2, 1], vec![2, 1]);
        assert_eq!(mono.angular_index(), vec![0, 0]);
        assert!(mono.is_action());
        // substituting z -> z e^{-i phi} multiplies z^0 zbar^2 by e^{2 i phi}
        let mono = Monomial::new(vec![0], vec![2]);
        assert_eq!(mono.angular_index(), vec![2]);
        let mono = Monomial::new(vec![1, 0], vec![0, 1]);
        assert_eq!(mono.angular_index(), vec![-1, 1]);
    }

    #[test]
    fn frame_validation() {
        assert!(Frame::new(vec![rat(1, 1), rat(1, 2)]).is_ok());
        assert!(Frame::new(vec![rat(0, 1)]).is_err());
        assert!(Frame::new(vec![rat(3, 2)]).is_err());
        assert!(Frame::new(vec![]).is_err());
    }

    #[test]
    fn k_norm_and_dot() {
        let k = vec![-1i64, 2];
        assert_eq!(k_norm(&k), 3);
        let omega = vec![rat(1, 1), rat(1, 2)];
        assert_eq!(omega_dot_k(&omega, &k), rat(0, 1));
    }
}
