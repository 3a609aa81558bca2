//! Independent Weyl-quantization route by ladder-operator symmetrization.
//!
//! Symmetric ordering is basis-independent under linear canonical changes of
//! frame, so the Weyl operator of `z^m zbar^n` equals
//! `(2 w hbar)^{(m+n)/2}` times the average of all orderings of `m`
//! lowering and `n` raising operators, mode by mode. Products are evaluated
//! on an enlarged basis and truncated back, so retained entries are exact.
//! This route shares nothing with the heat-semigroup route and is used to
//! cross-check it for low-degree symbols.

use super::matrix::OperatorMatrix;
use super::QuantizeError;
use crate::num::rat_f64;
use crate::symbol::PolySymbol;
use nalgebra::DMatrix;
use num_complex::Complex;

/// Average over all distinct arrangements of `m` lowering and `n` raising
/// operators, on a basis of dimension `dim` (computed with headroom
/// `dim + m + n` and truncated back).
fn symmetrized_ladder(m: u8, n: u8, dim: usize) -> DMatrix<f64> {
    let pad = dim + (m + n) as usize;
    let mut lower = DMatrix::zeros(pad, pad);
    for j in 1..pad {
        lower[(j - 1, j)] = (j as f64).sqrt();
    }
    let raise = lower.transpose();
    let total = (m + n) as usize;
    let mut acc = DMatrix::zeros(pad, pad);
    let mut count = 0u64;
    // every bitmask with n raised positions is one arrangement
    for mask in 0u32..(1 << total) {
        if mask.count_ones() != n as u32 {
            continue;
        }
        let mut prod = DMatrix::identity(pad, pad);
        for slot in 0..total {
            let op = if (mask >> slot) & 1 == 1 { &raise } else { &lower };
            prod = op * prod;
        }
        acc += prod;
        count += 1;
    }
    if count == 0 {
        acc = DMatrix::identity(pad, pad);
        count = 1;
    }
    (acc / count as f64).view((0, 0), (dim, dim)).clone_owned()
}

/// Weyl matrix of a symbol by direct symmetrization; intended for total
/// degree at most four (the arrangement count grows combinatorially).
pub fn weyl_ladder_matrix(
    f: &PolySymbol,
    hbar: f64,
    dims: &[usize],
) -> Result<OperatorMatrix, QuantizeError> {
    if dims.is_empty() || dims.iter().any(|&n| n == 0) {
        return Err(QuantizeError::BadCutoff);
    }
    let size: usize = dims.iter().product();
    let mut mat = DMatrix::from_element(size, size, Complex::new(0.0, 0.0));
    for (mono, c) in f.terms() {
        let cval = c.eval_f64(hbar);
        // per-mode symmetrized factors
        let factors: Vec<DMatrix<f64>> = (0..dims.len())
            .map(|k| {
                let base = symmetrized_ladder(mono.m[k], mono.n[k], dims[k]);
                let two_w_hbar =
                    2.0 * rat_f64(&f.frame().omega()[k]) * hbar;
                base * two_w_hbar.powi((mono.m[k] + mono.n[k]) as i32).sqrt()
            })
            .collect();
        for row in 0..size {
            let ra = super::matrix::flat_to_alpha(dims, row);
            for col in 0..size {
                let ca = super::matrix::flat_to_alpha(dims, col);
                let mut v = 1.0f64;
                for k in 0..dims.len() {
                    v *= factors[k][(ra[k], ca[k])];
                    if v == 0.0 {
                        break;
                    }
                }
                if v != 0.0 {
                    mat[(row, col)] += cval * v;
                }
            }
        }
    }
    Ok(OperatorMatrix {
        dims: dims.to_vec(),
        hbar,
        mat,
        meta: "weyl(ladder route)".into(),
    })
}
