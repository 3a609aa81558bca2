//! The heat semigroup on symbols, linking Weyl and anti-Wick quantization.
//!
//! The generator is the phase-space Laplacian expressed in the calibrated
//! per-mode coordinates (the ones in which the Bargmann weight is the
//! standard Gaussian): `Delta = sum_k 4 w_k d_{z_k} d_{zbar_k}`. On the unit
//! frame this is the plain Laplacian in `(x, xi)`. Anti-Wick and Weyl symbols
//! of the same operator are related by flowing time `hbar/4` forward
//! (`AW = exp(t Delta) W` at `t = hbar/4`); negative time inverts.

use super::QuantizeError;
use crate::num::{big_factorial, cr, rat_pow, HPoly, Rat};
use crate::symbol::{Monomial, PolySymbol};

/// Flow time `c * hbar^e`; polynomial symbols stay polynomial.
#[derive(Clone, Debug)]
pub struct HeatTime {
    pub coeff: Rat,
    pub hbar_exp: u32,
}

impl HeatTime {
    pub fn new(coeff: Rat, hbar_exp: u32) -> Self {
        HeatTime { coeff, hbar_exp }
    }

    /// The forward anti-Wick time `hbar/4`.
    pub fn forward_quarter() -> Self {
        HeatTime::new(Rat::new(1.into(), 4.into()), 1)
    }

    /// The inverse flow `-hbar/4` (Weyl from anti-Wick).
    pub fn backward_quarter() -> Self {
        HeatTime::new(Rat::new((-1).into(), 4.into()), 1)
    }
}

/// One application of the calibrated Laplacian.
pub fn calibrated_laplacian(f: &PolySymbol) -> PolySymbol {
    let frame = f.frame().clone();
    let mut out = PolySymbol::zero(frame.clone(), f.degree_cap());
    for (mono, c) in f.terms() {
        for k in 0..frame.l() {
            let (mk, nk) = (mono.m[k], mono.n[k]);
            if mk == 0 || nk == 0 {
                continue;
            }
            let factor = Rat::from_integer((4 * (mk as i64) * (nk as i64)).into())
                * &frame.omega()[k];
            let mut m = mono.m.clone();
            let mut n = mono.n.clone();
            m[k] -= 1;
            n[k] -= 1;
            out.add_term(Monomial::new(m, n), c.scale(&cr(factor)));
        }
    }
    out
}

/// Exact heat flow `exp(t Delta) f = sum_j t^j Delta^j f / j!`; the series
/// terminates on polynomials. Satisfies the semigroup identity exactly.
pub fn heat_flow(f: &PolySymbol, t: &HeatTime) -> PolySymbol {
    let mut acc = f.clone();
    let mut iter = f.clone();
    let mut j = 0u32;
    loop {
        j += 1;
        iter = calibrated_laplacian(&iter);
        if iter.is_zero() {
            break;
        }
        let scale = HPoly::term(
            cr(rat_pow(&t.coeff, j) / Rat::from(big_factorial(j as u64))),
            t.hbar_exp * j,
        );
        acc = acc.add(&iter.scale_hpoly(&scale)).expect("same frame");
    }
    acc
}

/// Truncated anti-Wick-to-Weyl expansion with its discarded part.
///
/// Returns `sum_{j<n_terms} (hbar Delta / 4)^j g / j!`, the explicit
/// discarded remainder (finite for polynomials), and the class drop of the
/// remainder: degree falls by `2 n_terms` while the parameter order gains
/// `n_terms`. The remainder's leading parameter exponent is checked against
/// the gain.
pub fn weyl_from_antiwick_truncated(
    g: &PolySymbol,
    n_terms: u32,
) -> Result<(PolySymbol, PolySymbol, (u32, u32)), QuantizeError> {
    let full = heat_flow(g, &HeatTime::forward_quarter());
    let mut partial = g.clone();
    let mut iter = g.clone();
    for j in 1..n_terms {
        iter = calibrated_laplacian(&iter);
        if iter.is_zero() {
            break;
        }
        let scale = HPoly::term(
            cr(rat_pow(&Rat::new(1.into(), 4.into()), j)
                / Rat::from(big_factorial(j as u64))),
            j,
        );
        partial = partial.add(&iter.scale_hpoly(&scale)).expect("same frame");
    }
    let discarded = full.sub(&partial).expect("same frame");
    let mu = g
        .terms()
        .filter_map(|(_, c)| c.min_exp())
        .min()
        .unwrap_or(0);
    if !discarded.is_zero() {
        let lead = discarded
            .terms()
            .filter_map(|(_, c)| c.min_exp())
            .min()
            .unwrap();
        debug_assert!(lead >= mu + n_terms, "heat remainder order too low");
    }
    Ok((partial, discarded, (2 * n_terms, n_terms)))
}
