//! Step schedules, iterated norm bounds, and the admissible strength.

use super::EngineError;
use crate::num::Rat;
use num_bigint::BigInt;
use serde::Serialize;

/// Per-step analytic parameters.
///
/// Width losses follow `sigma_p = sigma / (4 p^2)` (likewise for the angular
/// width), so the surviving widths stay above a third of the originals for
/// every step. The budget update is
/// `gamma_p = gamma_{p-1} - eps_p (1 + K_{p-1}^tau)` with
/// `eps_p = eps^{2^{p-1}} ||q_{p-1}||` and `K_p = p K`, `K_0 = K`.
#[derive(Clone, Debug, Serialize)]
pub struct ScheduleParams {
    pub p: u32,
    #[serde(serialize_with = "crate::num::serialize_rat")]
    pub sigma_p: Rat,
    #[serde(serialize_with = "crate::num::serialize_rat")]
    pub s_p: Rat,
    #[serde(serialize_with = "crate::num::serialize_rat")]
    pub rho_p: Rat,
    #[serde(serialize_with = "crate::num::serialize_rat")]
    pub r_p: Rat,
    pub k_p: u32,
    pub k_prev: u32,
    pub gamma_p: f64,
    pub eps_p: f64,
}

/// Advance the schedule one step.
pub fn schedule(
    p: u32,
    prior: Option<&ScheduleParams>,
    sigma: &Rat,
    rho: &Rat,
    gamma: f64,
    k_cut: u32,
    tau: f64,
    eps_nominal: f64,
    norm_q_prev: f64,
) -> Result<ScheduleParams, EngineError> {
    assert!(p >= 1);
    let four_p2 = Rat::from_integer(BigInt::from(4 * (p as i64) * (p as i64)));
    let sigma_p = sigma / &four_p2;
    let rho_p = rho / &four_p2;
    let (s_prev, r_prev, gamma_prev) = match prior {
        Some(sp) => (sp.s_p.clone(), sp.r_p.clone(), sp.gamma_p),
        None => (sigma.clone(), rho.clone(), gamma),
    };
    let s_p = &s_prev - &sigma_p;
    let r_p = &r_prev - &rho_p;
    let k_prev = if p == 1 { k_cut } else { (p - 1) * k_cut };
    let eps_p = pow_2exp(eps_nominal.abs(), p - 1) * norm_q_prev;
    let gamma_p = gamma_prev - eps_p * (1.0 + (k_prev as f64).powf(tau));
    if gamma_p <= 0.0 {
        return Err(EngineError::GammaExhausted { p, gamma: gamma_p });
    }
    Ok(ScheduleParams {
        p,
        sigma_p,
        s_p,
        rho_p,
        r_p,
        k_p: p * k_cut,
        k_prev,
        gamma_p,
        eps_p,
    })
}

/// `x^(2^e)` without integer-shift overflow; underflows to zero gracefully.
pub fn pow_2exp(x: f64, e: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    ((e as f64).exp2() * x.ln()).exp()
}

/// The closed-form iterated bound
/// `(4 p^2 / rho)^{2 tau p} (4 p^2 / sigma)^{2 p} ||q_0||^{2^p}`.
pub fn theoretical_norm_bound(p: u32, rho: f64, sigma: f64, tau: f64, norm_q0: f64) -> f64 {
    let fp = 4.0 * (p as f64) * (p as f64);
    (fp / rho).powf(2.0 * tau * p as f64)
        * (fp / sigma).powf(2.0 * p as f64)
        * norm_q0.powf((1u64 << p) as f64)
}

/// The same ladder obtained by folding the one-step recurrence
/// `B_p = rho_p^{-2 tau} sigma_p^{-2} B_{p-1}^2` from `B_0 = ||q_0||`.
pub fn theoretical_norm_bound_recurrence(
    p: u32,
    rho: f64,
    sigma: f64,
    tau: f64,
    norm_q0: f64,
) -> f64 {
    let mut b = norm_q0;
    for j in 1..=p {
        let fp = 4.0 * (j as f64) * (j as f64);
        b = (fp / rho).powf(2.0 * tau) * (fp / sigma).powf(2.0) * b * b;
    }
    b
}

/// Largest strength for which the weighted ladder decreases, the cutoff
/// admissibility `(1 + K_{p-1}^tau) < gamma_{p-1} / (eps ||q_{p-1}||)` holds,
/// and the budget stays positive through `p_max` steps. Returns infinity for
/// a vanishing perturbation and zero when no positive strength works.
pub fn epsilon_star(
    rho: f64,
    sigma: f64,
    tau: f64,
    gamma: f64,
    norm_q0: f64,
    k_cut: u32,
    p_max: u32,
) -> f64 {
    if norm_q0 == 0.0 {
        return f64::INFINITY;
    }
    let admissible = |eps: f64| -> bool {
        let mut gamma_cur = gamma;
        let mut b_prev = norm_q0;
        let mut weighted_prev = f64::INFINITY;
        for p in 1..=p_max {
            let k_prev = if p == 1 {
                k_cut as f64
            } else {
                ((p - 1) * k_cut) as f64
            };
            let kfac = 1.0 + k_prev.powf(tau);
            if kfac >= gamma_cur / (eps * b_prev) {
                return false;
            }
            let eps_p = pow_2exp(eps, p - 1) * b_prev;
            gamma_cur -= eps_p * kfac;
            if gamma_cur <= 0.0 {
                return false;
            }
            let b_p = theoretical_norm_bound(p, rho, sigma, tau, norm_q0);
            let weighted = pow_2exp(eps, p) * b_p;
            if !weighted.is_finite() {
                return false;
            }
            // strict decrease while the ladder is resolvable; an exact
            // underflow to zero counts as having converged
            if weighted > 0.0 && weighted >= weighted_prev {
                return false;
            }
            weighted_prev = if weighted > 0.0 { weighted } else { 0.0 };
            b_prev = b_p;
        }
        true
    };
    if admissible(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
