//! Symbols graded by formal order in the perturbation strength.

use crate::symbol::{BracketMode, PolySymbol, SymbolError};
use crate::num::cr;
use num_rational::BigRational;
use std::collections::BTreeMap;

/// A finite sum `sum_o eps^o f_o` of symbols keyed by formal order, with all
/// content above `cap` dropped.
#[derive(Clone, Debug)]
pub struct EpsGraded {
    pub orders: BTreeMap<u64, PolySymbol>,
    pub cap: u64,
}

impl EpsGraded {
    pub fn new(cap: u64) -> Self {
        EpsGraded {
            orders: BTreeMap::new(),
            cap,
        }
    }

    pub fn add_at(&mut self, order: u64, sym: &PolySymbol) -> Result<(), SymbolError> {
        if order > self.cap || sym.is_zero() {
            return Ok(());
        }
        match self.orders.get(&order) {
            Some(existing) => {
                let sum = existing.add(sym)?;
                if sum.is_zero() {
                    self.orders.remove(&order);
                } else {
                    self.orders.insert(order, sum);
                }
            }
            None => {
                self.orders.insert(order, sym.clone());
            }
        }
        Ok(())
    }

    pub fn get(&self, order: u64) -> Option<&PolySymbol> {
        self.orders.get(&order)
    }

    pub fn take(&mut self, order: u64) -> Option<PolySymbol> {
        self.orders.remove(&order)
    }

    pub fn min_order(&self) -> Option<u64> {
        self.orders.keys().next().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.orders.is_empty()
    }

    /// Conjugate by `exp(ad of eps^{o_w} w)`: every graded component spawns
    /// the bracket ladder `(1/r!) ad_w^r` shifted up by `r * o_w`.
    pub fn conjugate(
        &mut self,
        w: &PolySymbol,
        o_w: u64,
        mode: BracketMode,
    ) -> Result<(), SymbolError> {
        assert!(o_w >= 1, "generator must carry positive order");
        let snapshot: Vec<(u64, PolySymbol)> = self
            .orders
            .iter()
            .map(|(o, s)| (*o, s.clone()))
            .collect();
        for (o, sym) in snapshot {
            let mut term = sym;
            let mut r = 0u64;
            loop {
                r += 1;
                let target = o + r * o_w;
                if target > self.cap {
                    break;
                }
                term = mode
                    .bracket(w, &term)?
                    .scale(&cr(BigRational::new(1.into(), (r as i64).into())));
                if term.is_zero() {
                    break;
                }
                self.add_at(target, &term)?;
            }
        }
        Ok(())
    }

    /// Evaluate the graded sum at a numeric strength, collapsing to one
    /// symbol weighted by `eps^(o - base)`.
    pub fn collapse(&self, eps: f64, hbar: f64, base: u64) -> CollapsedNorms {
        let mut max_coeff = 0.0f64;
        let mut l1 = 0.0f64;
        for (o, sym) in &self.orders {
            let weight = if *o >= base {
                eps.powi((*o - base) as i32)
            } else {
                continue;
            };
            // eps^0 = 1 even when eps = 0
            let weight = if *o == base { 1.0 } else { weight };
            max_coeff = max_coeff.max(sym.max_coeff_mag(hbar) * weight);
            l1 += sym.l1_coeff_norm(hbar) * weight;
        }
        CollapsedNorms { max_coeff, l1 }
    }

    /// Aggregate truncation ledger across all grades.
    pub fn trunc_totals(&self) -> (u64, f64) {
        let mut dropped = 0;
        let mut max_mag = 0.0f64;
        for sym in self.orders.values() {
            dropped += sym.trunc().dropped;
            max_mag = max_mag.max(sym.trunc().max_mag);
        }
        (dropped, max_mag)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CollapsedNorms {
    pub max_coeff: f64,
    pub l1: f64,
}
