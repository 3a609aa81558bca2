//! Spectral comparison: matching predicted levels to computed eigenvalues,
//! remainder scaling experiments, and the anti-Wick expansion norm check.

use super::matrix::{operator_norm, weyl_diagonal_exact};
use super::QuantizeError;
use crate::fit::{fit_loglog, Fit};
use crate::symbol::PolySymbol;
use serde::Serialize;

/// A predicted level: the bare quantization formula and the variant with
/// the diagonal of the quantized remainder added.
#[derive(Clone, Debug, Serialize)]
pub struct PredictedLevel {
    pub alpha: Vec<usize>,
    pub formula: f64,
    pub with_remainder: f64,
}

/// One matched level.
#[derive(Clone, Debug, Serialize)]
pub struct MatchRow {
    pub alpha: Vec<usize>,
    pub e_diag: f64,
    pub e_pred_formula: f64,
    pub e_pred_with_remainder: f64,
    pub residual: f64,
    pub residual_with_remainder: f64,
    pub trunc_drift: f64,
}

/// Matching outcome with scaling fits.
#[derive(Clone, Debug, Serialize, Default)]
pub struct SpectralReport {
    pub rows: Vec<MatchRow>,
    pub skipped_window: usize,
    pub skipped_drift: usize,
    pub ambiguous: Vec<(Vec<usize>, f64)>,
    pub fitted_exponents: Vec<(String, f64, f64)>,
}

impl SpectralReport {
    /// Fit of |residual| against |alpha| hbar over rows with alpha != 0.
    pub fn fit_residual_vs_level(&self, hbar: f64) -> Option<Fit> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for row in &self.rows {
            let an: usize = row.alpha.iter().sum();
            if an == 0 || row.residual <= 0.0 {
                continue;
            }
            xs.push(an as f64 * hbar);
            ys.push(row.residual);
        }
        if xs.len() < 2 {
            return None;
        }
        Some(fit_loglog(&xs, &ys))
    }
}

/// Greedy nearest-value matching of predictions to eigenvalues, in
/// increasing predicted order, restricted to the locality window
/// `|alpha| hbar < eta` and to truncation-stable levels.
///
/// `eigs_refined`, when given, is the spectrum at a finer cutoff; a level
/// whose drift between the two exceeds `drift_tol` is skipped, not matched.
/// Two predictions contending for one eigenvalue are reported as ambiguous
/// and the later one takes the nearest unused value.
pub fn match_spectrum(
    eigs: &[f64],
    eigs_refined: Option<&[f64]>,
    preds: &[PredictedLevel],
    eta: f64,
    hbar: f64,
    drift_tol: f64,
) -> Result<SpectralReport, QuantizeError> {
    let mut report = SpectralReport::default();
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[a]
            .with_remainder
            .partial_cmp(&preds[b].with_remainder)
            .unwrap()
    });
    let mut used = vec![false; eigs.len()];
    for &pi in &order {
        let p = &preds[pi];
        let an: usize = p.alpha.iter().sum();
        if an as f64 * hbar >= eta {
            report.skipped_window += 1;
            continue;
        }
        // nearest eigenvalue by binary search, then widen to nearest unused
        let target = p.with_remainder;
        let pos = eigs.partition_point(|&e| e < target);
        let mut best: Option<(usize, f64)> = None;
        let probe = |idx: usize, used: &[bool], best: &mut Option<(usize, f64)>| {
            if idx < eigs.len() && !used[idx] {
                let d = (eigs[idx] - target).abs();
                if best.map_or(true, |(_, bd)| d < bd) {
                    *best = Some((idx, d));
                }
            }
        };
        for delta in 0..eigs.len() {
            if pos + delta < eigs.len() {
                probe(pos + delta, &used, &mut best);
            }
            if delta + 1 <= pos {
                probe(pos - delta - 1, &used, &mut best);
            }
            if let Some((_, bd)) = best {
                // once we have a candidate closer than the next reachable
                // spacing we can stop widening
                let lo_done = delta + 1 > pos;
                let hi_done = pos + delta >= eigs.len();
                if (lo_done || (eigs[pos - delta - 1] - target).abs() > bd)
                    && (hi_done || (eigs[(pos + delta).min(eigs.len() - 1)] - target).abs() > bd)
                    && delta > 1
                {
                    break;
                }
            }
        }
        let Some((idx, _)) = best else {
            continue;
        };
        // nearest *overall* eigenvalue already taken by an earlier
        // prediction is an ambiguity worth surfacing
        let nearest_any = {
            let mut bi = idx;
            let mut bd = (eigs[idx] - target).abs();
            if pos < eigs.len() {
                let d = (eigs[pos] - target).abs();
                if d < bd {
                    bd = d;
                    bi = pos;
                }
            }
            if pos > 0 {
                let d = (eigs[pos - 1] - target).abs();
                if d < bd {
                    bi = pos - 1;
                }
            }
            bi
        };
        if nearest_any != idx && used[nearest_any] {
            report.ambiguous.push((p.alpha.clone(), eigs[nearest_any]));
        }
        let drift = match eigs_refined {
            Some(refined) if idx < refined.len() => (eigs[idx] - refined[idx]).abs(),
            _ => 0.0,
        };
        if drift > drift_tol {
            report.skipped_drift += 1;
            continue;
        }
        used[idx] = true;
        report.rows.push(MatchRow {
            alpha: p.alpha.clone(),
            e_diag: eigs[idx],
            e_pred_formula: p.formula,
            e_pred_with_remainder: p.with_remainder,
            residual: (eigs[idx] - p.formula).abs(),
            residual_with_remainder: (eigs[idx] - p.with_remainder).abs(),
            trunc_drift: drift,
        });
    }
    report.rows.sort_by(|a, b| a.alpha.cmp(&b.alpha));
    if let Some(fit) = report.fit_residual_vs_level(hbar) {
        report
            .fitted_exponents
            .push(("residual_vs_level".into(), fit.slope, fit.stderr));
    }
    Ok(report)
}

/// One grid point of the order-four matrix-element scaling experiment.
#[derive(Clone, Debug, Serialize)]
pub struct PropA1Row {
    pub hbar: f64,
    pub alpha: Vec<usize>,
    pub x: f64,
    pub element: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropA1Table {
    pub rows: Vec<PropA1Row>,
    /// Per-hbar slope of log|element| against log(|alpha| hbar).
    pub per_hbar_slopes: Vec<(f64, f64, f64)>,
    /// Pooled slope across the whole grid.
    pub pooled_slope: f64,
    pub pooled_stderr: f64,
    /// max_alpha |element| / (|alpha| hbar)^2 per hbar; uniformity proxy.
    pub constants: Vec<(f64, f64)>,
}

/// Diagonal Weyl elements of a symbol vanishing to fourth order, over a
/// grid of parameter values and levels, with quadratic-scaling fits.
pub fn prop_a1_scaling(
    f: &PolySymbol,
    hbar_list: &[f64],
    alpha_list: &[Vec<usize>],
) -> Result<PropA1Table, QuantizeError> {
    let found = f.vanishing_order().unwrap_or(0);
    if found < 4 {
        return Err(QuantizeError::VanishingOrder {
            required: 4,
            found,
        });
    }
    let mut rows = Vec::new();
    let mut per_hbar = Vec::new();
    let mut constants = Vec::new();
    let mut pooled_x = Vec::new();
    let mut pooled_y = Vec::new();
    for &hbar in hbar_list {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut cmax = 0.0f64;
        for alpha in alpha_list {
            let d = weyl_diagonal_exact(f, alpha)?;
            let val = d.eval_f64(hbar).norm();
            let an: usize = alpha.iter().sum();
            let x = an as f64 * hbar;
            rows.push(PropA1Row {
                hbar,
                alpha: alpha.clone(),
                x,
                element: val,
            });
            if an > 0 && val > 0.0 {
                xs.push(x);
                ys.push(val);
                pooled_x.push(x);
                pooled_y.push(val);
                cmax = cmax.max(val / (x * x));
            }
        }
        if xs.len() >= 2 {
            let fit = fit_loglog(&xs, &ys);
            per_hbar.push((hbar, fit.slope, fit.stderr));
        }
        constants.push((hbar, cmax));
    }
    let pooled = fit_loglog(&pooled_x, &pooled_y);
    Ok(PropA1Table {
        rows,
        per_hbar_slopes: per_hbar,
        pooled_slope: pooled.slope,
        pooled_stderr: pooled.stderr,
        constants,
    })
}

/// Operator norm of the two-term anti-Wick expansion remainder:
/// `|| W(g) - AW(g) + (hbar/4) AW(Delta g) ||` on the truncated basis.
pub fn antiwick_remainder_norm(
    g: &PolySymbol,
    hbar: f64,
    dims: &[usize],
) -> Result<f64, QuantizeError> {
    let w = super::matrix::weyl_matrix_elements(g, hbar, dims)?;
    let aw = super::matrix::toeplitz_matrix_elements(g, hbar, dims)?;
    let lap = super::heat::calibrated_laplacian(g);
    let aw_lap = super::matrix::toeplitz_matrix_elements(&lap, hbar, dims)?;
    let combo = w.add(&aw.scaled(-1.0)).add(&aw_lap.scaled(hbar / 4.0));
    operator_norm(&combo)
}
