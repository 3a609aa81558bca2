//! Driving the iteration and consuming its output.

use super::graded::EpsGraded;
use super::schedule::{epsilon_star, ScheduleParams};
use super::EngineError;
use crate::num::{rat_f64, CRat, HPoly, Rat};
use crate::quantize::{weyl_diagonal_exact, PredictedLevel};
use crate::symbol::{BracketMode, Frame, PolySymbol};
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeMap;

/// Everything a run needs. Rational fields keep the algebra exact; the
/// nominal strength anchors divisor updates and residual measurements
/// (set it to zero for a purely formal expansion). `hbar_divisor` is the
/// parameter value at which frequency updates enter the divisors; zero keeps
/// the quantum iteration's classical part identical to the classical run.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub frame: Frame,
    pub q0: PolySymbol,
    pub mode: BracketMode,
    pub gamma: Rat,
    pub tau: Rat,
    pub k_cut: u32,
    pub steps: u32,
    pub rho: Rat,
    pub sigma: Rat,
    pub eps_nominal: Rat,
    pub hbar_nominal: Rat,
    pub hbar_divisor: Rat,
    pub order_cap: u64,
    pub trunc_overflow_fraction: f64,
    pub eta: f64,
}

impl EngineConfig {
    pub fn new(frame: Frame, q0: PolySymbol, mode: BracketMode, steps: u32) -> Self {
        EngineConfig {
            frame,
            q0,
            mode,
            gamma: Rat::new(1.into(), 2.into()),
            tau: Rat::new(3.into(), 2.into()),
            k_cut: 5,
            steps,
            rho: Rat::from_integer(1.into()),
            sigma: Rat::from_integer(1.into()),
            eps_nominal: Rat::zero(),
            hbar_nominal: Rat::zero(),
            hbar_divisor: Rat::zero(),
            order_cap: 1u64 << steps,
            trunc_overflow_fraction: 1e3,
            eta: 2.0,
        }
    }
}

/// A parked remainder: extracted at `leading_order` and carried through all
/// later conjugations as a graded symbol.
#[derive(Clone, Debug)]
pub struct RemainderEntry {
    pub leading_order: u64,
    pub graded: EpsGraded,
}

/// Per-step residual measurements against the analytic ladder.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualRecord {
    pub p: u32,
    /// max coefficient magnitude of the residual at the nominal point,
    /// relative to its leading order
    pub measured: f64,
    /// l1 coefficient mass, same normalization
    pub l1: f64,
    pub bound_displayed: f64,
    pub bound_recurrence: f64,
    pub gamma_p: f64,
    pub eps_p: f64,
    pub dropped_terms: u64,
}

/// Full state after `step` steps.
#[derive(Clone, Debug)]
pub struct IterationState {
    pub mode: BracketMode,
    pub step: u32,
    /// Graded Hamiltonian: order 0 is the current quadratic form, higher
    /// orders hold unprocessed content.
    pub h: EpsGraded,
    /// Effective frequency at the nominal point; feeds the divisors.
    pub omega_num: Vec<Rat>,
    pub omega_series: BTreeMap<u64, Vec<HPoly>>,
    pub energy_series: BTreeMap<u64, HPoly>,
    pub generators: Vec<(u64, PolySymbol)>,
    pub remainders: Vec<RemainderEntry>,
    pub schedule_history: Vec<ScheduleParams>,
    pub residual_history: Vec<ResidualRecord>,
    pub min_divisor: Option<(Vec<i64>, Rat)>,
    pub small_divisor_events: u64,
    pub norm_q0: f64,
    pub converged_exactly: bool,
}

impl IterationState {
    fn new(cfg: &EngineConfig) -> Result<Self, EngineError> {
        let mut h = EpsGraded::new(cfg.order_cap);
        h.add_at(0, &PolySymbol::p0(&cfg.frame, cfg.q0.degree_cap()))?;
        h.add_at(1, &cfg.q0)?;
        Ok(IterationState {
            mode: cfg.mode,
            step: 0,
            h,
            omega_num: cfg.frame.omega().to_vec(),
            omega_series: BTreeMap::new(),
            energy_series: BTreeMap::new(),
            generators: Vec::new(),
            remainders: Vec::new(),
            schedule_history: Vec::new(),
            residual_history: Vec::new(),
            min_divisor: None,
            small_divisor_events: 0,
            norm_q0: cfg.q0.max_coeff_mag(rat_f64(&cfg.hbar_nominal)),
            converged_exactly: false,
        })
    }

    /// Frequency series evaluated exactly at rational parameters.
    pub fn omega_at_exact(&self, frame: &Frame, eps: &Rat, hbar: &Rat) -> Vec<Rat> {
        let mut out: Vec<Rat> = frame.omega().to_vec();
        for (o, coeffs) in &self.omega_series {
            let w = crate::num::rat_pow(eps, *o as u32);
            for (j, c) in coeffs.iter().enumerate() {
                let v: CRat = c.eval(hbar);
                debug_assert!(v.im.is_zero());
                out[j] += v.re * &w;
            }
        }
        out
    }

    /// Energy series evaluated exactly at rational parameters.
    pub fn energy_at_exact(&self, eps: &Rat, hbar: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (o, c) in &self.energy_series {
            let v = c.eval(hbar);
            debug_assert!(v.im.is_zero());
            acc += v.re * crate::num::rat_pow(eps, *o as u32);
        }
        acc
    }

    pub fn omega_at(&self, frame: &Frame, eps: f64, hbar: f64) -> Vec<f64> {
        let mut out: Vec<f64> = frame.omega().iter().map(rat_f64).collect();
        for (o, coeffs) in &self.omega_series {
            let w = eps.powi(*o as i32);
            for (j, c) in coeffs.iter().enumerate() {
                out[j] += c.eval_f64(hbar).re * w;
            }
        }
        out
    }

    pub fn energy_at(&self, eps: f64, hbar: f64) -> f64 {
        self.energy_series
            .iter()
            .map(|(o, c)| c.eval_f64(hbar).re * eps.powi(*o as i32))
            .sum()
    }

    /// The residual content at orders >= 2^step, collapsed to one symbol
    /// with weights relative to the leading order; empty when converged.
    pub fn residual_orders(&self) -> Vec<(u64, &PolySymbol)> {
        let base = 1u64 << self.step;
        self.h
            .orders
            .iter()
            .filter(|(o, _)| **o >= base)
            .map(|(o, s)| (*o, s))
            .collect()
    }
}

/// Certificate: measured residuals against the analytic ladder, the budget
/// trajectory, and the admissible-strength estimate.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceCertificate {
    pub epsilon_star: f64,
    pub eps_nominal: f64,
    pub within_eps_star: bool,
    pub steps: Vec<ResidualRecord>,
    pub gamma_infinity: f64,
    pub min_divisor: f64,
    pub min_divisor_k: Vec<i64>,
    pub small_divisor_events: u64,
    pub truncation_dropped: u64,
    pub truncation_max_mag: f64,
    /// measured <= displayed bound at every step
    pub all_bounds_hold: bool,
}

/// Run the iteration for the configured number of steps (stopping early on
/// exact convergence or budget exhaustion).
pub fn run(cfg: &EngineConfig) -> Result<(IterationState, ConvergenceCertificate), EngineError> {
    if !cfg.q0.is_real() || cfg.q0.vanishing_order().map_or(false, |v| v < 2) {
        return Err(EngineError::InvalidPerturbation);
    }
    let scan = crate::dioph::check_diophantine(
        cfg.frame.omega(),
        &cfg.gamma,
        &cfg.tau,
        cfg.k_cut * cfg.steps.max(1),
    )
    .map_err(|_| EngineError::InvalidPerturbation)?;
    if !scan.pass {
        return Err(EngineError::DiophantineFailed { k: scan.worst_k });
    }
    let mut state = IterationState::new(cfg)?;
    for _ in 0..cfg.steps {
        super::step::kam_step(cfg, &mut state)?;
        if state.converged_exactly {
            break;
        }
    }
    let cert = certificate(cfg, &state);
    Ok((state, cert))
}

fn certificate(cfg: &EngineConfig, state: &IterationState) -> ConvergenceCertificate {
    let eps_star = epsilon_star(
        rat_f64(&cfg.rho),
        rat_f64(&cfg.sigma),
        rat_f64(&cfg.tau),
        rat_f64(&cfg.gamma),
        state.norm_q0,
        cfg.k_cut,
        cfg.steps,
    );
    let eps_nom = rat_f64(&cfg.eps_nominal);
    let (dropped, max_mag) = state.h.trunc_totals();
    let all_hold = state
        .residual_history
        .iter()
        .all(|r| r.measured <= r.bound_displayed);
    ConvergenceCertificate {
        epsilon_star: eps_star,
        eps_nominal: eps_nom,
        within_eps_star: eps_nom <= eps_star,
        steps: state.residual_history.clone(),
        gamma_infinity: state
            .schedule_history
            .last()
            .map(|s| s.gamma_p)
            .unwrap_or(rat_f64(&cfg.gamma)),
        min_divisor: state
            .min_divisor
            .as_ref()
            .map(|(_, d)| rat_f64(d))
            .unwrap_or(f64::INFINITY),
        min_divisor_k: state
            .min_divisor
            .as_ref()
            .map(|(k, _)| k.clone())
            .unwrap_or_default(),
        small_divisor_events: state.small_divisor_events,
        truncation_dropped: dropped,
        truncation_max_mag: max_mag,
        all_bounds_hold: all_hold,
    }
}

/// The quantization formula at a level, with and without the diagonal of the
/// quantized parked remainders.
pub fn predict_level(
    cfg: &EngineConfig,
    state: &IterationState,
    alpha: &[usize],
    hbar: f64,
    eps: f64,
) -> Result<PredictedLevel, EngineError> {
    let level: usize = alpha.iter().sum();
    let val = level as f64 * hbar;
    if val >= cfg.eta {
        return Err(EngineError::LocalityWindow { val, eta: cfg.eta });
    }
    let omega = state.omega_at(&cfg.frame, eps, hbar);
    let energy = state.energy_at(eps, hbar);
    let mut formula = energy;
    for (j, w) in omega.iter().enumerate() {
        formula += w * hbar * alpha[j] as f64;
    }
    // the half-sum term reads |omega| as the l1 norm, matching the
    // unperturbed ground energy
    formula += 0.5 * hbar * omega.iter().sum::<f64>();

    let mut with_remainder = formula;
    for rem in &state.remainders {
        for (o, sym) in &rem.graded.orders {
            let d = weyl_diagonal_exact(sym, alpha)?;
            with_remainder += d.eval_f64(hbar).re * eps.powi(*o as i32);
        }
    }
    Ok(PredictedLevel {
        alpha: alpha.to_vec(),
        formula,
        with_remainder,
    })
}

/// Exact-rational version of the bare quantization formula.
pub fn predict_level_exact(
    cfg: &EngineConfig,
    state: &IterationState,
    alpha: &[usize],
    hbar: &Rat,
    eps: &Rat,
) -> Rat {
    let omega = state.omega_at_exact(&cfg.frame, eps, hbar);
    let mut acc = state.energy_at_exact(eps, hbar);
    for (j, w) in omega.iter().enumerate() {
        acc += w * hbar * Rat::from_integer((alpha[j] as i64).into());
    }
    let half = Rat::new(1.into(), 2.into());
    acc += omega.iter().sum::<Rat>() * hbar * half;
    acc
}

/// Evaluate the accumulated remainder symbols on a torus of given actions
/// (angle zero), with the strength weights of their formal orders.
pub fn remainder_eval(state: &IterationState, actions: &[f64], hbar: f64, eps: f64) -> f64 {
    let mut acc = 0.0;
    for rem in &state.remainders {
        for (o, sym) in &rem.graded.orders {
            acc += sym.eval_at_actions(actions, hbar).re * eps.powi(*o as i32);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use crate::symbol::Frame;

    fn base_cfg(q0: PolySymbol, mode: BracketMode, steps: u32) -> EngineConfig {
        let frame = q0.frame().clone();
        EngineConfig::new(frame, q0, mode, steps)
    }

    #[test]
    fn action_perturbation_terminates_in_one_step() {
        let f = Frame::unit(1);
        let q0 = PolySymbol::action(&f, 10, 0).pow(2).unwrap();
        let mut cfg = base_cfg(q0, BracketMode::Classical, 3);
        cfg.eps_nominal = rat(1, 100);
        let (state, cert) = run(&cfg).unwrap();
        assert!(state.converged_exactly);
        assert_eq!(state.step, 1);
        assert!(state.generators.is_empty());
        assert_eq!(state.remainders.len(), 1);
        assert_eq!(state.residual_history[0].measured, 0.0);
        assert!(cert.all_bounds_hold);
    }

    #[test]
    fn x2_first_step_frequency_shift_is_one() {
        // q0 = x^2: N_1 = I, so omega_1 = 1 + eps exactly
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 10, 0, 2);
        let mut cfg = base_cfg(q0, BracketMode::Classical, 1);
        cfg.eps_nominal = rat(1, 10);
        let (state, _) = run(&cfg).unwrap();
        let shift = &state.omega_series[&1];
        assert_eq!(shift[0], HPoly::one());
        let w1 = state.omega_at_exact(&cfg.frame, &rat(1, 10), &Rat::zero());
        assert_eq!(w1[0], rat(11, 10));
        // divisors were updated to the shifted frequency
        assert_eq!(state.omega_num[0], rat(11, 10));
    }

    #[test]
    fn x4_first_step_structure() {
        // q0 = x^4: N_1 = (3/2) I^2: no energy, no shift, remainder parked
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 10, 0, 4);
        let mut cfg = base_cfg(q0, BracketMode::Classical, 1);
        cfg.eps_nominal = rat(1, 1000);
        let (state, _) = run(&cfg).unwrap();
        assert!(state.energy_series.get(&1).is_none());
        assert!(state.omega_series.get(&1).is_none());
        assert_eq!(state.remainders.len(), 1);
        let rem = &state.remainders[0];
        assert_eq!(rem.leading_order, 1);
        let sym = rem.graded.get(1).unwrap();
        let i2 = PolySymbol::action(&f, 10, 0)
            .pow(2)
            .unwrap()
            .scale(&crate::num::cr(rat(3, 2)));
        assert_eq!(sym.clone(), i2);
        // and a nonzero order-2 residual remains
        assert!(!state.h.orders.keys().all(|&o| o == 0));
    }

    #[test]
    fn formal_mode_reproduces_the_square_root_series() {
        // q0 = x^2 at eps_nominal = 0 is a pure order-by-order expansion;
        // the frequency series must match the Taylor series of sqrt(1+2eps)
        // through every processed order.
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 10, 0, 2);
        let cfg = base_cfg(q0, BracketMode::Classical, 3);
        let (state, _) = run(&cfg).unwrap();
        let expected = [
            rat(1, 1),
            rat(-1, 2),
            rat(1, 2),
            rat(-5, 8),
            rat(7, 8),
            rat(-21, 16),
            rat(33, 16),
        ];
        for (idx, coeff) in expected.iter().enumerate() {
            let o = (idx + 1) as u64;
            let got = state
                .omega_series
                .get(&o)
                .map(|v| v[0].clone())
                .unwrap_or_else(HPoly::zero);
            assert_eq!(
                got,
                HPoly::constant(crate::num::cr(coeff.clone())),
                "order {o}"
            );
        }
    }

    #[test]
    fn superconvergence_on_the_rescaled_oscillator() {
        // at nominal eps the frequency after p steps differs from
        // sqrt(1+2 eps) by O(eps^{2^p})
        let f = Frame::unit(1);
        let eps = rat(1, 50);
        for (steps, min_order) in [(1u32, 2i32), (2, 4), (3, 8)] {
            let q0 = PolySymbol::x_power(&f, 10, 0, 2);
            let mut cfg = base_cfg(q0, BracketMode::Classical, steps);
            cfg.eps_nominal = eps.clone();
            let (state, _) = run(&cfg).unwrap();
            let w = state.omega_at_exact(&cfg.frame, &eps, &Rat::zero());
            // exact error via w^2 - (1+2eps), avoiding the irrational root
            let delta = &w[0] * &w[0] - (rat(1, 1) + rat(2, 1) * &eps);
            let err = crate::num::rat_f64(&delta).abs() / 2.0;
            let eps_f = crate::num::rat_f64(&eps);
            assert!(
                err < eps_f.powi(min_order) * 2.0,
                "steps {steps}: err {err:.3e} vs {:.3e}",
                eps_f.powi(min_order)
            );
            assert!(err > 0.0);
        }
    }

    #[test]
    fn quantum_classical_consistency_at_zero_divisor_point() {
        // the parameter-degree-zero part of every quantum output equals the
        // classical output exactly
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 10, 0, 4);
        let mut ccfg = base_cfg(q0.clone(), BracketMode::Classical, 2);
        ccfg.eps_nominal = rat(1, 1000);
        let mut qcfg = base_cfg(q0, BracketMode::Quantum, 2);
        qcfg.eps_nominal = rat(1, 1000);
        let (cs, _) = run(&ccfg).unwrap();
        let (qs, _) = run(&qcfg).unwrap();
        for (o, cvec) in &cs.omega_series {
            let qvec = &qs.omega_series[o];
            for (c, q) in cvec.iter().zip(qvec) {
                assert_eq!(c.clone(), q.degree0(), "omega order {o}");
            }
        }
        for (o, c) in &cs.energy_series {
            assert_eq!(c.clone(), qs.energy_series[o].degree0(), "energy order {o}");
        }
        // residual symbols agree at parameter degree zero
        for (o, csym) in cs.h.orders.iter().filter(|(o, _)| **o > 0) {
            let qsym = qs.h.get(*o).cloned().unwrap_or_else(|| {
                PolySymbol::zero(Frame::unit(1), 10)
            });
            assert_eq!(csym.clone(), qsym.hbar_degree0(), "residual order {o}");
        }
    }

    #[test]
    fn invalid_perturbations_are_rejected() {
        let f = Frame::unit(1);
        let q0 = PolySymbol::x(&f, 10, 0); // linear: violates the hypothesis
        let cfg = base_cfg(q0, BracketMode::Classical, 1);
        assert!(matches!(run(&cfg), Err(EngineError::InvalidPerturbation)));
        let q0 = PolySymbol::constant(f, 10, crate::num::c_one());
        let cfg = base_cfg(q0, BracketMode::Classical, 1);
        assert!(matches!(run(&cfg), Err(EngineError::InvalidPerturbation)));
    }

    #[test]
    fn resonant_base_frequency_is_rejected() {
        let f = Frame::new(vec![rat(1, 2), rat(1, 4)]).unwrap();
        let q0 = PolySymbol::x_power(&f, 10, 0, 2);
        let cfg = base_cfg(q0, BracketMode::Classical, 1);
        assert!(matches!(
            run(&cfg),
            Err(EngineError::DiophantineFailed { .. })
        ));
    }

    #[test]
    fn predictions_respect_the_locality_window() {
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 10, 0, 4);
        let mut cfg = base_cfg(q0, BracketMode::Quantum, 1);
        cfg.eps_nominal = rat(1, 1000);
        cfg.hbar_nominal = rat(1, 20);
        cfg.eta = 0.5;
        let (state, _) = run(&cfg).unwrap();
        assert!(predict_level(&cfg, &state, &[4], 0.05, 1e-3).is_ok());
        assert!(matches!(
            predict_level(&cfg, &state, &[10], 0.05, 1e-3),
            Err(EngineError::LocalityWindow { .. })
        ));
        // eps = 0 reduces to the unperturbed levels
        let p = predict_level(&cfg, &state, &[3], 0.05, 0.0).unwrap();
        assert!((p.formula - 0.05 * 3.5).abs() < 1e-15);
        assert_eq!(p.formula, p.with_remainder);
    }

    #[test]
    fn remainder_eval_vanishes_at_zero_action_and_scales_quadratically() {
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 10, 0, 4);
        let mut cfg = base_cfg(q0, BracketMode::Classical, 2);
        cfg.eps_nominal = rat(1, 100);
        let (state, _) = run(&cfg).unwrap();
        assert_eq!(remainder_eval(&state, &[0.0], 0.0, 0.01), 0.0);
        let xs: Vec<f64> = (1..=6).map(|j| 2.0f64.powi(-j)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&a| remainder_eval(&state, &[a], 0.0, 0.01).abs())
            .collect();
        let fit = crate::fit::fit_loglog(&xs, &ys);
        assert!(fit.slope >= 1.9, "slope {}", fit.slope);
    }

    #[test]
    fn quadratic_only_perturbation_has_zero_remainders() {
        let f = Frame::unit(1);
        let q0 = PolySymbol::x_power(&f, 10, 0, 2);
        let mut cfg = base_cfg(q0, BracketMode::Classical, 3);
        cfg.eps_nominal = rat(1, 50);
        let (state, _) = run(&cfg).unwrap();
        assert!(state.remainders.is_empty());
        for alpha in [[0usize], [3]] {
            let p = predict_level(&cfg, &state, &alpha, 0.1, 0.02).unwrap();
            assert_eq!(p.formula, p.with_remainder);
        }
    }
}
