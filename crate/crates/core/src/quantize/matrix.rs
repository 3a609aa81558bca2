//! Operator matrices on the truncated oscillator basis.
//!
//! Basis states are multi-indices `alpha` with `alpha_k < N_k`; entries come
//! from closed-form Bargmann moments. For a frame monomial `z^m zbar^n` the
//! per-mode element between levels `j` (row) and `j' = j + m - n` (column) is
//! `sqrt(rising(j, m) * rising(j', n)) * (2 w hbar)^{(m+n)/2}`, and the full
//! element is the product over modes times the coefficient.

use super::{heat::HeatTime, QuantizeError};
use crate::num::{rat_f64, rat_pow, rising, HPoly, Rat};
use crate::symbol::PolySymbol;
use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Dense Hermitian matrix with its basis geometry and provenance.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub dims: Vec<usize>,
    pub hbar: f64,
    pub mat: DMatrix<Complex<f64>>,
    pub meta: String,
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn alpha_to_flat(&self, alpha: &[usize]) -> Option<usize> {
        alpha_to_flat(&self.dims, alpha)
    }

    pub fn flat_to_alpha(&self, idx: usize) -> Vec<usize> {
        flat_to_alpha(&self.dims, idx)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.size();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn scale(&self) -> f64 {
        self.mat.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dims, other.dims);
        OperatorMatrix {
            dims: self.dims.clone(),
            hbar: self.hbar,
            mat: &self.mat + &other.mat,
            meta: format!("{} + {}", self.meta, other.meta),
        }
    }

    pub fn scaled(&self, s: f64) -> OperatorMatrix {
        OperatorMatrix {
            dims: self.dims.clone(),
            hbar: self.hbar,
            mat: self.mat.map(|c| c * s),
            meta: format!("{} * {s}", self.meta),
        }
    }
}

pub fn alpha_to_flat(dims: &[usize], alpha: &[usize]) -> Option<usize> {
    if alpha.len() != dims.len() {
        return None;
    }
    let mut idx = 0usize;
    for (a, n) in alpha.iter().zip(dims) {
        if a >= n {
            return None;
        }
        idx = idx * n + a;
    }
    Some(idx)
}

pub fn flat_to_alpha(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut alpha = vec![0usize; dims.len()];
    for k in (0..dims.len()).rev() {
        alpha[k] = idx % dims[k];
        idx /= dims[k];
    }
    alpha
}

/// Per-mode Bargmann element between row level `j` and column `j + m - n`.
fn mode_element(j: usize, m: u8, n: u8, two_w_hbar: f64) -> Option<(usize, f64)> {
    let jp = j as i64 + m as i64 - n as i64;
    if jp < 0 {
        return None;
    }
    let jp = jp as usize;
    let r1 = rising(j as u64, m as u64).to_f64().unwrap();
    let r2 = rising(jp as u64, n as u64).to_f64().unwrap();
    let value = (r1 * r2).sqrt() * two_w_hbar.powi((m + n) as i32).sqrt();
    Some((jp, value))
}

/// Toeplitz (anti-Wick) matrix of a polynomial symbol.
pub fn toeplitz_matrix_elements(
    f: &PolySymbol,
    hbar: f64,
    dims: &[usize],
) -> Result<OperatorMatrix, QuantizeError> {
    if dims.is_empty() || dims.iter().any(|&n| n == 0) {
        return Err(QuantizeError::BadCutoff);
    }
    assert_eq!(dims.len(), f.frame().l(), "one cutoff per mode");
    let size: usize = dims.iter().product();
    let mut mat = DMatrix::from_element(size, size, Complex::new(0.0, 0.0));
    let two_w_hbar: Vec<f64> = f
        .frame()
        .omega()
        .iter()
        .map(|w| 2.0 * rat_f64(w) * hbar)
        .collect();
    for (mono, c) in f.terms() {
        let cval = c.eval_f64(hbar);
        if cval.norm() == 0.0 {
            continue;
        }
        for row in 0..size {
            let alpha = flat_to_alpha(dims, row);
            let mut col_alpha = vec![0usize; dims.len()];
            let mut factor = 1.0f64;
            let mut ok = true;
            for k in 0..dims.len() {
                match mode_element(alpha[k], mono.m[k], mono.n[k], two_w_hbar[k]) {
                    Some((jp, v)) if jp < dims[k] => {
                        col_alpha[k] = jp;
                        factor *= v;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let col = alpha_to_flat(dims, &col_alpha).unwrap();
            mat[(row, col)] += cval * factor;
        }
    }
    Ok(OperatorMatrix {
        dims: dims.to_vec(),
        hbar,
        mat,
        meta: "anti-wick".into(),
    })
}

/// Weyl matrix via the inverse heat flow followed by the Toeplitz route.
pub fn weyl_matrix_elements(
    f: &PolySymbol,
    hbar: f64,
    dims: &[usize],
) -> Result<OperatorMatrix, QuantizeError> {
    let aw_symbol = super::heat::heat_flow(f, &HeatTime::backward_quarter());
    let mut m = toeplitz_matrix_elements(&aw_symbol, hbar, dims)?;
    m.meta = "weyl(anti-wick route)".into();
    Ok(m)
}

/// Exact Toeplitz diagonal element for a level; only angular-index-zero
/// terms contribute, and the result is a rational polynomial in the
/// semiclassical parameter.
pub fn toeplitz_diagonal_exact(
    f: &PolySymbol,
    alpha: &[usize],
) -> Result<HPoly, QuantizeError> {
    if alpha.len() != f.frame().l() {
        return Err(QuantizeError::LevelOutOfRange(alpha.to_vec()));
    }
    let mut acc = HPoly::zero();
    for (mono, c) in f.terms() {
        if !mono.is_action() {
            continue;
        }
        let mut scale = Rat::from_integer(1.into());
        let mut hshift = 0u32;
        for k in 0..alpha.len() {
            let m = mono.m[k];
            scale *= Rat::from(rising(alpha[k] as u64, m as u64));
            let two_w = Rat::from_integer(2.into()) * &f.frame().omega()[k];
            scale *= rat_pow(&two_w, m as u32);
            hshift += m as u32;
        }
        acc.add_assign(&c.scale(&crate::num::cr(scale)).mul_hbar_pow(hshift));
    }
    Ok(acc)
}

/// Exact Weyl diagonal element via the inverse heat flow.
pub fn weyl_diagonal_exact(f: &PolySymbol, alpha: &[usize]) -> Result<HPoly, QuantizeError> {
    let aw_symbol = super::heat::heat_flow(f, &HeatTime::backward_quarter());
    toeplitz_diagonal_exact(&aw_symbol, alpha)
}

/// `H = P0 + eps * Op(q0)`: exact oscillator diagonal plus the Weyl matrix
/// of the perturbation.
pub fn assemble_hamiltonian(
    omega: &[Rat],
    q0: &PolySymbol,
    eps: f64,
    hbar: f64,
    dims: &[usize],
) -> Result<OperatorMatrix, QuantizeError> {
    let mut h = weyl_matrix_elements(q0, hbar, dims)?.scaled(eps);
    let size = h.size();
    for idx in 0..size {
        let alpha = flat_to_alpha(dims, idx);
        let e0: f64 = omega
            .iter()
            .zip(&alpha)
            .map(|(w, &a)| rat_f64(w) * hbar * (a as f64 + 0.5))
            .sum();
        h.mat[(idx, idx)] += Complex::new(e0, 0.0);
    }
    h.meta = "oscillator + perturbation".into();
    Ok(h)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn spectrum(m: &OperatorMatrix) -> Result<Vec<f64>, QuantizeError> {
    let asym = m.max_asymmetry();
    let scale = m.scale().max(1e-300);
    if asym > 1e-12 * scale {
        return Err(QuantizeError::NonHermitian(asym));
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(m.mat.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Spectral (operator) norm of a Hermitian matrix.
pub fn operator_norm(m: &OperatorMatrix) -> Result<f64, QuantizeError> {
    let vals = spectrum(m)?;
    Ok(vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{cr, rat};
    use crate::symbol::Frame;

    #[test]
    fn constant_symbol_gives_identity() {
        let f = Frame::unit(1);
        let one = PolySymbol::constant(f, 6, crate::num::c_one());
        let m = toeplitz_matrix_elements(&one, 0.1, &[5]).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m.mat[(i, j)].re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn toeplitz_diagonal_of_action_is_hbar_n_plus_one() {
        // T(|z_B|^2) has diagonal hbar (n+1); the action I equals |z_B|^2
        let f = Frame::unit(1);
        let action = PolySymbol::action(&f, 6, 0);
        for n in 0..6usize {
            let d = toeplitz_diagonal_exact(&action, &[n]).unwrap();
            assert_eq!(d, HPoly::term(cr(rat(n as i64 + 1, 1)), 1));
        }
    }

    #[test]
    fn toeplitz_diagonal_of_action_squared_matches_moment_formula() {
        // T(|z_B|^4) diagonal = hbar^2 (n+1)(n+2)
        let f = Frame::unit(1);
        let action2 = PolySymbol::action(&f, 6, 0).pow(2).unwrap();
        for n in 0..6usize {
            let d = toeplitz_diagonal_exact(&action2, &[n]).unwrap();
            let expect = rat((n as i64 + 1) * (n as i64 + 2), 1);
            assert_eq!(d, HPoly::term(cr(expect), 2));
        }
    }

    #[test]
    fn oscillator_calibration_diagonal_is_exact() {
        // Weyl(p0) diagonal = hbar <omega, alpha + 1/2>, exactly, any frame
        let f = Frame::new(vec![rat(1, 1), rat(5, 7)]).unwrap();
        let p0 = PolySymbol::p0(&f, 6);
        for a0 in 0..4usize {
            for a1 in 0..4usize {
                let d = weyl_diagonal_exact(&p0, &[a0, a1]).unwrap();
                let expect = rat(2 * a0 as i64 + 1, 2) * rat(1, 1)
                    + rat(2 * a1 as i64 + 1, 2) * rat(5, 7);
                assert_eq!(d, HPoly::term(cr(expect), 1));
            }
        }
    }

    #[test]
    fn weyl_of_x_is_the_standard_tridiagonal() {
        // <n-1| x |n> = sqrt(hbar n / 2) on the unit frame
        let f = Frame::unit(1);
        let x = PolySymbol::x(&f, 6, 0);
        let hbar = 0.3;
        let m = weyl_matrix_elements(&x, hbar, &[6]).unwrap();
        for n in 1..6usize {
            let expect = (hbar * n as f64 / 2.0).sqrt();
            assert!((m.mat[(n - 1, n)].re - expect).abs() < 1e-13);
            assert!((m.mat[(n, n - 1)].re - expect).abs() < 1e-13);
        }
        assert!(m.max_asymmetry() < 1e-14);
    }

    #[test]
    fn hermitian_for_real_symbols_with_momentum() {
        let f = Frame::unit(1);
        let sym = PolySymbol::from_xi_monomial(&f, 8, &[1], &[2], HPoly::one()).unwrap();
        assert!(sym.is_real());
        let m = weyl_matrix_elements(&sym, 0.2, &[8]).unwrap();
        assert!(m.max_asymmetry() < 1e-13 * m.scale().max(1.0));
    }

    #[test]
    fn rescaled_oscillator_eigenvalues_match_closed_form() {
        // H = p0 + eps x^2 has exact levels hbar sqrt(1+2eps) (n + 1/2)
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 6, 0, 2);
        let (eps, hbar) = (0.05, 0.1);
        let dims = [96usize];
        let h = assemble_hamiltonian(&[rat(1, 1)], &q0, eps, hbar, &dims).unwrap();
        let eigs = spectrum(&h).unwrap();
        let freq = (1.0 + 2.0 * eps).sqrt();
        for n in 0..12 {
            let expect = hbar * freq * (n as f64 + 0.5);
            assert!(
                (eigs[n] - expect).abs() < 1e-8,
                "level {n}: {} vs {expect}",
                eigs[n]
            );
        }
    }

    #[test]
    fn spectrum_contract_on_small_matrices() {
        let f = Frame::unit(1);
        let zero = PolySymbol::zero(f, 4);
        let mut m = toeplitz_matrix_elements(&zero, 1.0, &[2]).unwrap();
        m.mat[(0, 1)] = Complex::new(1.0, 0.0);
        m.mat[(1, 0)] = Complex::new(1.0, 0.0);
        let eigs = spectrum(&m).unwrap();
        assert!((eigs[0] + 1.0).abs() < 1e-14);
        assert!((eigs[1] - 1.0).abs() < 1e-14);
        // diagonal matrices return the sorted diagonal
        m.mat[(0, 1)] = Complex::new(0.0, 0.0);
        m.mat[(1, 0)] = Complex::new(0.0, 0.0);
        m.mat[(0, 0)] = Complex::new(3.0, 0.0);
        m.mat[(1, 1)] = Complex::new(-2.0, 0.0);
        let eigs = spectrum(&m).unwrap();
        assert_eq!(eigs, vec![-2.0, 3.0]);
        // non-Hermitian input is refused
        m.mat[(0, 1)] = Complex::new(0.5, 0.0);
        assert!(matches!(
            spectrum(&m),
            Err(QuantizeError::NonHermitian(_))
        ));
    }

    #[test]
    fn multimode_p0_spectrum_is_the_lattice_of_level_sums() {
        let f = Frame::new(vec![rat(1, 1), rat(5, 8)]).unwrap();
        let q0 = PolySymbol::zero(f, 4);
        let hbar = 0.25;
        let h = assemble_hamiltonian(&[rat(1, 1), rat(5, 8)], &q0, 0.0, hbar, &[6, 6]).unwrap();
        let eigs = spectrum(&h).unwrap();
        let mut expect: Vec<f64> = (0..6)
            .flat_map(|a| {
                (0..6).map(move |b| {
                    hbar * ((a as f64 + 0.5) + 0.625 * (b as f64 + 0.5))
                })
            })
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in eigs.iter().zip(&expect) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn positivity_of_nonnegative_toeplitz_symbols() {
        // T(|z|^{2j}) is diagonal with nonnegative entries
        let f = Frame::unit(1);
        for j in 1..4u32 {
            let sym = PolySymbol::action(&f, 8, 0)
                .scale(&cr(rat(2, 1)))
                .pow(j)
                .unwrap();
            let m = toeplitz_matrix_elements(&sym, 0.3, &[8]).unwrap();
            let eigs = spectrum(&m).unwrap();
            assert!(eigs.iter().all(|&e| e >= -1e-14));
            for i in 0..8 {
                assert!(m.mat[(i, i)].re >= 0.0);
            }
        }
    }
}
