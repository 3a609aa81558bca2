//! The homological equation `{p0, w} + N = g` with `{p0, N} = 0`.
//!
//! `{p0, .}` acts diagonally on monomials with eigenvalue `-i <w_eff, k>`
//! where `k` is the angular index, so the equation is solved term by term:
//! the angular-zero component of `g` becomes `N`, every other component is
//! divided by its divisor. The residual identity holds exactly and is pinned
//! by tests; small divisors are recorded, never silently amplified.

use super::{k_norm, omega_dot_k, PolySymbol, SymbolError};
use crate::dioph::margin_below_gamma;
use crate::num::{CRat, Rat};
use num_traits::{Signed, Zero};

/// Outcome of a homological solve.
#[derive(Clone, Debug)]
pub struct HomologicalSolution {
    /// Oscillating solution, supported on nonzero angular indices.
    pub w: PolySymbol,
    /// Normal part: the angular-zero projection of the input.
    pub n: PolySymbol,
    /// Smallest |<w_eff, k>| encountered, with its index.
    pub min_divisor: Option<(Vec<i64>, Rat)>,
    /// Indices whose divisor fell below the diophantine floor gamma |k|^-tau.
    pub small_divisor_warnings: Vec<(Vec<i64>, Rat)>,
}

/// Solve `{p0(w_eff), w} + N = g` exactly.
///
/// `omega_eff` is the effective frequency whose action form generates the
/// torus flow at this stage. When `dioph = Some((gamma, tau))`, divisors
/// below the floor are recorded as warnings (not fatal); an exactly zero
/// divisor is an error.
pub fn solve_homological(
    g: &PolySymbol,
    omega_eff: &[Rat],
    dioph: Option<(&Rat, &Rat)>,
) -> Result<HomologicalSolution, SymbolError> {
    assert_eq!(omega_eff.len(), g.frame().l(), "frequency arity mismatch");
    let mut w = PolySymbol::zero(g.frame().clone(), g.degree_cap());
    let mut n = PolySymbol::zero(g.frame().clone(), g.degree_cap());
    let mut min_divisor: Option<(Vec<i64>, Rat)> = None;
    let mut warnings = Vec::new();

    for (mono, c) in g.terms() {
        let k = mono.angular_index();
        if k.iter().all(|&v| v == 0) {
            n.add_term(mono.clone(), c.clone());
            continue;
        }
        let d = omega_dot_k(omega_eff, &k);
        if d.is_zero() {
            return Err(SymbolError::ZeroDivisor(k));
        }
        let d_abs = d.abs();
        if let Some((gamma, tau)) = dioph {
            if margin_below_gamma(&d_abs, k_norm(&k), tau, gamma) {
                warnings.push((k.clone(), d_abs.clone()));
            }
        }
        match &min_divisor {
            Some((_, cur)) if *cur <= d_abs => {}
            _ => min_divisor = Some((k.clone(), d_abs)),
        }
        // eigenvalue of {p0, .} is -i d, so w_k = g_k / (-i d) = (i/d) g_k
        let factor: CRat = CRat::new(Rat::zero(), Rat::from_integer(1.into()) / d);
        w.add_term(mono.clone(), c.scale(&factor));
    }
    Ok(HomologicalSolution {
        w,
        n,
        min_divisor,
        small_divisor_warnings: warnings,
    })
}

/// Residual `{p0_eff, w} + N - g`; exactly zero for a correct solve.
pub fn homological_residual(
    sol: &HomologicalSolution,
    g: &PolySymbol,
    omega_eff: &[Rat],
) -> Result<PolySymbol, SymbolError> {
    let p0_eff = PolySymbol::action_form(g.frame(), g.degree_cap(), omega_eff);
    let br = super::poisson_bracket(&p0_eff, &sol.w)?;
    br.add(&sol.n)?.sub(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{cr, rat, HPoly};
    use crate::symbol::{Frame, Monomial};

    #[test]
    fn action_function_passes_through() {
        let f = Frame::unit(1);
        let g = PolySymbol::action(&f, 10, 0).pow(2).unwrap();
        let sol = solve_homological(&g, &[rat(1, 1)], None).unwrap();
        assert!(sol.w.is_zero());
        assert_eq!(sol.n, g);
        assert!(homological_residual(&sol, &g, &[rat(1, 1)])
            .unwrap()
            .is_zero());
    }

    #[test]
    fn golden_divisor_single_pair() {
        // divisor for k = (-1, 1) is w2 - w1 with the golden-ratio frequency
        let phi = rat(1_134_903_170, 1_836_311_903);
        let f = Frame::new(vec![rat(1, 1), phi.clone()]).unwrap();
        let mut g = PolySymbol::zero(f.clone(), 10);
        g.add_term(Monomial::new(vec![1, 0], vec![0, 1]), HPoly::one());
        g.add_term(Monomial::new(vec![0, 1], vec![1, 0]), HPoly::one());
        let omega = vec![rat(1, 1), phi.clone()];
        let sol = solve_homological(&g, &omega, None).unwrap();
        assert!(sol.n.is_zero());
        let (_, dmin) = sol.min_divisor.clone().unwrap();
        assert_eq!(dmin, rat(1, 1) - phi);
        assert!(homological_residual(&sol, &g, &omega).unwrap().is_zero());
    }

    #[test]
    fn x4_solution_structure() {
        let f = Frame::unit(1);
        let g = PolySymbol::x_power(&f, 10, 0, 4);
        let omega = vec![rat(1, 1)];
        let sol = solve_homological(&g, &omega, None).unwrap();
        // N = (3/8) z^2 zbar^2 and w is supported on k = +-2, +-4
        assert_eq!(
            sol.n.coeff(&Monomial::new(vec![2], vec![2])),
            HPoly::constant(cr(rat(3, 8)))
        );
        let mut ks = sol.w.angular_support();
        ks.sort();
        assert_eq!(ks, vec![vec![-4], vec![-2], vec![2], vec![4]]);
        assert_eq!(sol.min_divisor.clone().unwrap().1, rat(2, 1));
        assert!(homological_residual(&sol, &g, &omega).unwrap().is_zero());
        assert!(sol.w.is_real());
    }

    #[test]
    fn zero_divisor_detected_for_resonant_frequency() {
        let f = Frame::new(vec![rat(1, 2), rat(1, 4)]).unwrap();
        let mut g = PolySymbol::zero(f, 10);
        // k = (1, -2) is resonant for omega = (1/2, 1/4)
        g.add_term(Monomial::new(vec![0, 2], vec![1, 0]), HPoly::one());
        let err = solve_homological(&g, &[rat(1, 2), rat(1, 4)], None).unwrap_err();
        assert!(matches!(err, SymbolError::ZeroDivisor(_)));
    }

    #[test]
    fn small_divisor_warning_recorded() {
        let f = Frame::new(vec![rat(1, 1), rat(1, 1_000)]).unwrap();
        let mut g = PolySymbol::zero(f, 10);
        g.add_term(Monomial::new(vec![0, 0], vec![0, 1]), HPoly::one());
        let gamma = rat(1, 10);
        let tau = rat(3, 2);
        let sol =
            solve_homological(&g, &[rat(1, 1), rat(1, 1_000)], Some((&gamma, &tau))).unwrap();
        assert_eq!(sol.small_divisor_warnings.len(), 1);
    }
}
