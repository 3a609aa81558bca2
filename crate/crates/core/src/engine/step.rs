//! One step of the iteration: solve, conjugate, absorb, measure.

use super::run::{EngineConfig, IterationState, RemainderEntry, ResidualRecord};
use super::schedule::{schedule, theoretical_norm_bound, theoretical_norm_bound_recurrence};
use super::EngineError;
use crate::num::{cr, rat_f64, HPoly, Rat};
use crate::symbol::{decompose_normal, solve_homological, Monomial, PolySymbol};
use num_traits::Zero;

/// Advance the state from step `p-1` to step `p`.
///
/// Every formal order in the block `[2^{p-1}, 2^p)` is normalized in turn:
/// the oscillating part of that order is removed by one conjugation whose
/// generator solves the homological equation against the current effective
/// frequency, the surviving normal part is split into an energy increment, a
/// frequency increment, and a parked remainder, and all parked remainders
/// are pushed through the same conjugation. At the end of the block the
/// numeric part of the processed frequency increments is absorbed into the
/// order-zero quadratic form (the divisors of the next step), evaluated at
/// the nominal strength.
pub(super) fn kam_step(
    cfg: &EngineConfig,
    state: &mut IterationState,
) -> Result<(), EngineError> {
    let p = state.step + 1;
    let norm_prev = state
        .residual_history
        .last()
        .map(|r| r.measured)
        .unwrap_or(state.norm_q0);
    let sched = schedule(
        p,
        state.schedule_history.last(),
        &cfg.sigma,
        &cfg.rho,
        rat_f64(&cfg.gamma),
        cfg.k_cut,
        rat_f64(&cfg.tau),
        rat_f64(&cfg.eps_nominal),
        norm_prev,
    )?;
    let gamma_prev = state
        .schedule_history
        .last()
        .map(|s| s.gamma_p)
        .unwrap_or(rat_f64(&cfg.gamma));
    let gamma_prev_rat = Rat::from_float(gamma_prev).unwrap_or_else(|| cfg.gamma.clone());

    let block_lo = 1u64 << (p - 1);
    let block_hi = 1u64 << p;
    for o in block_lo..block_hi {
        let Some(current) = state.h.get(o).cloned() else {
            continue;
        };
        let osc = current.oscillating_part();
        if !osc.is_zero() {
            let sol = solve_homological(&osc, &state.omega_num, Some((&gamma_prev_rat, &cfg.tau)))?;
            state.small_divisor_events += sol.small_divisor_warnings.len() as u64;
            if let Some((k, d)) = &sol.min_divisor {
                let better = match &state.min_divisor {
                    Some((_, cur)) => d < cur,
                    None => true,
                };
                if better {
                    state.min_divisor = Some((k.clone(), d.clone()));
                }
            }
            state.h.conjugate(&sol.w, o, cfg.mode)?;
            for rem in &mut state.remainders {
                rem.graded.conjugate(&sol.w, o, cfg.mode)?;
            }
            state.generators.push((o, sol.w));
        }
        // the oscillating content of this order is now cancelled exactly
        let settled = state.h.take(o).unwrap_or_else(|| {
            PolySymbol::zero(cfg.frame.clone(), cfg.q0.degree_cap())
        });
        let leftover_osc = settled.oscillating_part();
        assert!(
            leftover_osc.is_zero(),
            "order-{o} oscillating content survived its conjugation"
        );
        let d = decompose_normal(&settled)?;
        if !d.energy.is_zero() {
            state
                .energy_series
                .entry(o)
                .or_insert_with(HPoly::zero)
                .add_assign(&d.energy);
        }
        if d.frequency_shift.iter().any(|s| !s.is_zero()) {
            let entry = state
                .omega_series
                .entry(o)
                .or_insert_with(|| vec![HPoly::zero(); cfg.frame.l()]);
            for (e, s) in entry.iter_mut().zip(&d.frequency_shift) {
                e.add_assign(s);
            }
        }
        if !d.remainder.is_zero() {
            debug_assert!(d.remainder.vanishing_order().unwrap_or(4) >= 4);
            let mut graded = super::graded::EpsGraded::new(state.h.cap);
            graded.add_at(o, &d.remainder)?;
            state.remainders.push(RemainderEntry {
                leading_order: o,
                graded,
            });
        }
        // keep only the action-linear content in play at this order
        let lin = action_linear_symbol(cfg, &d.frequency_shift);
        if !lin.is_zero() {
            state.h.add_at(o, &lin)?;
        }
    }

    absorb_processed_orders(cfg, state, block_hi)?;

    // parked remainders keep fourth-order vanishing under conjugation: in
    // classical mode literally, in quantum mode in the symbol-class grading
    // where a semiclassical power counts as two degrees
    for rem in &state.remainders {
        for sym in rem.graded.orders.values() {
            debug_assert!(sym.weighted_vanishing_order().unwrap_or(4) >= 4);
            if cfg.mode == crate::symbol::BracketMode::Classical {
                debug_assert!(sym.vanishing_order().unwrap_or(4) >= 4);
            }
        }
    }

    let eps_f = rat_f64(&cfg.eps_nominal);
    let hbar_f = rat_f64(&cfg.hbar_nominal);
    let norms = state.h.collapse(eps_f, hbar_f, block_hi);
    let measured = norms.max_coeff;
    let (dropped, max_mag) = state.h.trunc_totals();
    let kept_scale = measured.max(state.norm_q0);
    if max_mag > cfg.trunc_overflow_fraction * kept_scale {
        return Err(EngineError::TruncationOverflow {
            p,
            dropped: max_mag,
            kept: kept_scale,
        });
    }
    let tau_f = rat_f64(&cfg.tau);
    state.residual_history.push(ResidualRecord {
        p,
        measured,
        l1: norms.l1,
        bound_displayed: theoretical_norm_bound(
            p,
            rat_f64(&cfg.rho),
            rat_f64(&cfg.sigma),
            tau_f,
            state.norm_q0,
        ),
        bound_recurrence: theoretical_norm_bound_recurrence(
            p,
            rat_f64(&cfg.rho),
            rat_f64(&cfg.sigma),
            tau_f,
            state.norm_q0,
        ),
        gamma_p: sched.gamma_p,
        eps_p: sched.eps_p,
        dropped_terms: dropped,
    });
    state.schedule_history.push(sched);
    state.step = p;
    state.converged_exactly = state.h.orders.keys().all(|&o| o == 0);
    Ok(())
}

/// Build `<shift, I>` as a symbol from per-mode coefficient polynomials.
fn action_linear_symbol(cfg: &EngineConfig, shift: &[HPoly]) -> PolySymbol {
    let l = cfg.frame.l();
    let mut out = PolySymbol::zero(cfg.frame.clone(), cfg.q0.degree_cap());
    for (j, s) in shift.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        let mut em = vec![0u8; l];
        em[j] = 1;
        let c = s.scale(&cr(
            Rat::new(1.into(), 2.into()) / &cfg.frame.omega()[j]
        ));
        out.add_term(Monomial::new(em.clone(), em), c);
    }
    out
}

/// Move the numeric part of every processed frequency increment into the
/// order-zero quadratic form and the effective frequency, leaving only the
/// parameter-dependent leftover in the graded system.
fn absorb_processed_orders(
    cfg: &EngineConfig,
    state: &mut IterationState,
    processed_below: u64,
) -> Result<(), EngineError> {
    if cfg.eps_nominal.is_zero() {
        // formal mode: divisors stay at the base frequency
        return Ok(());
    }
    let orders: Vec<u64> = state
        .h
        .orders
        .keys()
        .copied()
        .filter(|&o| o >= 1 && o < processed_below)
        .collect();
    for o in orders {
        let sym = state.h.take(o).unwrap();
        let d = decompose_normal(&sym)?;
        debug_assert!(d.energy.is_zero() && d.remainder.is_zero());
        let mut leftover = vec![HPoly::zero(); cfg.frame.l()];
        let mut absorbed = false;
        let eps_pow = crate::num::rat_pow(&cfg.eps_nominal, o as u32);
        for (j, s) in d.frequency_shift.iter().enumerate() {
            let at_div = s.eval(&cfg.hbar_divisor);
            debug_assert!(at_div.im.is_zero(), "frequency shift must be real");
            if !at_div.re.is_zero() {
                state.omega_num[j] += &at_div.re * &eps_pow;
                absorbed = true;
            }
            leftover[j] = s.sub(&HPoly::constant(cr(at_div.re)));
        }
        if absorbed {
            // refresh the order-zero quadratic form to the new frequency
            let p0_eff =
                PolySymbol::action_form(&cfg.frame, cfg.q0.degree_cap(), &state.omega_num);
            state.h.orders.insert(0, p0_eff);
        }
        let lin = action_linear_symbol(cfg, &leftover);
        if !lin.is_zero() {
            state.h.add_at(o, &lin)?;
        }
    }
    Ok(())
}
