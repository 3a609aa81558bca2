//! Lie transforms: exponential of the adjoint action of a generator.

use super::{moyal_bracket, poisson_bracket, PolySymbol, SymbolError};
use crate::num::{cr, rat_pow, Rat};

/// Which bracket drives the transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketMode {
    Classical,
    Quantum,
}

impl BracketMode {
    pub fn bracket(
        &self,
        f: &PolySymbol,
        g: &PolySymbol,
    ) -> Result<PolySymbol, SymbolError> {
        match self {
            BracketMode::Classical => poisson_bracket(f, g),
            BracketMode::Quantum => moyal_bracket(f, g),
        }
    }
}

/// `exp(t ad_w) H = sum_r t^r g_r` with `g_0 = H`, `g_r = (1/r) {w, g_{r-1}}`.
///
/// The generator must vanish to second order at the origin; the series is
/// truncated at the degree cap and stops at the first vanishing iterate.
/// If the iterates have not died out after `max_r` brackets the transform
/// refuses rather than returning a silently truncated exponential.
pub fn lie_transform(
    h: &PolySymbol,
    w: &PolySymbol,
    t: &Rat,
    mode: BracketMode,
    max_r: u32,
) -> Result<PolySymbol, SymbolError> {
    if let Some(v) = w.vanishing_order() {
        if v < 2 {
            return Err(SymbolError::NonTerminatingSeries {
                max_r: 0,
                mass: w.l1_coeff_norm(0.0),
            });
        }
    } else {
        return Ok(h.clone());
    }
    let mut acc = h.clone();
    let mut iter = h.clone();
    let mut r = 0u32;
    loop {
        r += 1;
        if r > max_r {
            if iter.is_zero() {
                break;
            }
            return Err(SymbolError::NonTerminatingSeries {
                max_r,
                mass: iter.l1_coeff_norm(1.0),
            });
        }
        iter = mode
            .bracket(w, &iter)?
            .scale(&cr(Rat::new(1.into(), (r as i64).into())));
        if iter.is_zero() {
            break;
        }
        acc = acc.add(&iter.scale(&cr(rat_pow(t, r))))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{c_one, cr, rat, HPoly};
    use crate::symbol::{solve_homological, Frame, Monomial};

    #[test]
    fn zero_generator_is_identity() {
        let f = Frame::unit(1);
        let h = PolySymbol::x_power(&f, 10, 0, 4);
        let w = PolySymbol::zero(f, 10);
        let out = lie_transform(&h, &w, &rat(1, 3), BracketMode::Classical, 30).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn first_order_term_solves_the_homological_equation() {
        // exp(t ad_w) p0 = p0 + t (N - g) + O(t^2) when w solves the equation:
        // the order-t iterate is {w, p0} = N - g by the residual identity,
        // and the remaining series is reconstructed bracket by bracket.
        let f = Frame::unit(1);
        let p0 = PolySymbol::p0(&f, 10);
        let g = PolySymbol::x_power(&f, 10, 0, 4);
        let omega = vec![rat(1, 1)];
        let sol = solve_homological(&g, &omega, None).unwrap();
        let order_t = crate::symbol::poisson_bracket(&sol.w, &p0).unwrap();
        assert_eq!(order_t, sol.n.sub(&g).unwrap());

        let t = rat(1, 7);
        let moved = lie_transform(&p0, &sol.w, &t, BracketMode::Classical, 40).unwrap();
        let mut expected = p0.clone();
        let mut iter = p0.clone();
        let mut r = 0u32;
        loop {
            r += 1;
            iter = crate::symbol::poisson_bracket(&sol.w, &iter)
                .unwrap()
                .scale(&cr(rat(1, r as i64)));
            if iter.is_zero() {
                break;
            }
            expected = expected
                .add(&iter.scale(&cr(crate::num::rat_pow(&t, r))))
                .unwrap();
        }
        assert_eq!(moved, expected);
    }

    #[test]
    fn shear_generator_gives_exact_linear_flow() {
        // w = x^2/2 is nilpotent on linear symbols: the series terminates and
        // reproduces the closed-form shear exp(t ad_w): xi -> xi + t x, x -> x.
        let f = Frame::unit(1);
        let w = PolySymbol::x_power(&f, 10, 0, 2).scale(&cr(rat(1, 2)));
        let xi = PolySymbol::xi(&f, 10, 0);
        let x = PolySymbol::x(&f, 10, 0);
        let t = rat(2, 5);
        let moved = lie_transform(&xi, &w, &t, BracketMode::Classical, 10).unwrap();
        let expected = xi.add(&x.scale(&cr(t.clone()))).unwrap();
        assert_eq!(moved, expected);
        let fixed = lie_transform(&x, &w, &t, BracketMode::Classical, 10).unwrap();
        assert_eq!(fixed, x);
    }

    #[test]
    fn rotation_generator_trips_the_guard() {
        // p0 rotates the frame coordinates; the series never terminates
        let f = Frame::unit(1);
        let w = PolySymbol::p0(&f, 10);
        let mut z = PolySymbol::zero(f, 10);
        z.add_term(Monomial::new(vec![1], vec![0]), HPoly::one());
        let err = lie_transform(&z, &w, &rat(1, 2), BracketMode::Classical, 12).unwrap_err();
        assert!(matches!(err, SymbolError::NonTerminatingSeries { .. }));
    }

    #[test]
    fn vanishing_order_never_decreases() {
        let f = Frame::unit(1);
        let w = PolySymbol::x_power(&f, 12, 0, 3).scale(&cr(rat(1, 5)));
        let h = PolySymbol::x_power(&f, 12, 0, 4);
        let out = lie_transform(&h, &w, &rat(1, 3), BracketMode::Classical, 40).unwrap();
        assert!(out.vanishing_order().unwrap() >= h.vanishing_order().unwrap());
        let _ = c_one();
    }

    #[test]
    fn reality_preserved() {
        let f = Frame::unit(1);
        let w = PolySymbol::x_power(&f, 12, 0, 3).scale(&cr(rat(1, 5)));
        let h = PolySymbol::x_power(&f, 12, 0, 4);
        for mode in [BracketMode::Classical, BracketMode::Quantum] {
            let out = lie_transform(&h, &w, &rat(1, 3), mode, 40).unwrap();
            assert!(out.is_real());
        }
    }
}
