//! Splitting a normal symbol into energy, frequency shift, and remainder.

use super::{Monomial, PolySymbol, SymbolError};
use crate::num::{cr, HPoly, Rat};

/// `N(I) = energy + <shift, I> + remainder(I)`, with the remainder vanishing
/// to second order in the actions (fourth order in z).
#[derive(Clone, Debug)]
pub struct NormalDecomposition {
    pub energy: HPoly,
    pub frequency_shift: Vec<HPoly>,
    pub remainder: PolySymbol,
}

/// Exact decomposition of an angular-index-zero symbol.
pub fn decompose_normal(n: &PolySymbol) -> Result<NormalDecomposition, SymbolError> {
    let l = n.frame().l();
    let mut energy = HPoly::zero();
    let mut shift = vec![HPoly::zero(); l];
    let mut remainder = PolySymbol::zero(n.frame().clone(), n.degree_cap());
    for (mono, c) in n.terms() {
        let k = mono.angular_index();
        if k.iter().any(|&v| v != 0) {
            return Err(SymbolError::NonNormalInput(k));
        }
        let deg = mono.total_degree();
        if deg == 0 {
            energy.add_assign(c);
        } else if deg == 2 {
            // z_j zbar_j = 2 w_j I_j, so the I_j coefficient is 2 w_j c
            let j = mono.m.iter().position(|&e| e == 1).unwrap();
            let two_w = Rat::from_integer(2.into()) * &n.frame().omega()[j];
            shift[j].add_assign(&c.scale(&cr(two_w)));
        } else {
            remainder.add_term(mono.clone(), c.clone());
        }
    }
    Ok(NormalDecomposition {
        energy,
        frequency_shift: shift,
        remainder,
    })
}

/// Rebuild the symbol from a decomposition; inverse of [`decompose_normal`].
pub fn recompose_normal(
    d: &NormalDecomposition,
    frame: &super::Frame,
    _degree_cap: u32,
) -> PolySymbol {
    let l = frame.l();
    let mut out = d.remainder.clone();
    out.add_term(Monomial::unit(l), d.energy.clone());
    for (j, s) in d.frequency_shift.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        let mut em = vec![0u8; l];
        em[j] = 1;
        let c = s.scale(&cr(
            Rat::new(1.into(), 2.into()) / &frame.omega()[j]
        ));
        out.add_term(Monomial::new(em.clone(), em), c);
    }
    out
}
