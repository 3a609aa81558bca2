//! The polynomial symbol type and its basic (non-bracket) operations.

use super::{Frame, Monomial, SymbolError};
use crate::num::{c_one, conj, cr, cri, rat, rat_pow, CRat, HPoly, Rat};
use num_complex::Complex;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Record of terms dropped by degree-cap truncation.
///
/// `max_mag` is the largest l1 coefficient mass among dropped terms
/// (parameter set to 1); it is a diagnostic, not a certified bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TruncationLedger {
    pub dropped: u64,
    pub max_mag: f64,
}

impl TruncationLedger {
    pub fn merge(&mut self, other: &TruncationLedger) {
        self.dropped += other.dropped;
        if other.max_mag > self.max_mag {
            self.max_mag = other.max_mag;
        }
    }

    pub fn record(&mut self, mag: f64) {
        self.dropped += 1;
        if mag > self.max_mag {
            self.max_mag = mag;
        }
    }
}

/// Finite sum of monomials `z^m zbar^n` with [`HPoly`] coefficients.
///
/// Terms above the degree cap are dropped on construction and the drop is
/// recorded in the ledger. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySymbol {
    frame: Frame,
    degree_cap: u32,
    terms: BTreeMap<Monomial, HPoly>,
    trunc: TruncationLedger,
}

impl PolySymbol {
    pub fn zero(frame: Frame, degree_cap: u32) -> Self {
        PolySymbol {
            frame,
            degree_cap,
            terms: BTreeMap::new(),
            trunc: TruncationLedger::default(),
        }
    }

    pub fn constant(frame: Frame, degree_cap: u32, c: CRat) -> Self {
        let mut s = Self::zero(frame, degree_cap);
        s.add_term(Monomial::unit(s.frame.l()), HPoly::constant(c));
        s
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn trunc(&self) -> &TruncationLedger {
        &self.trunc
    }

    pub fn trunc_mut(&mut self) -> &mut TruncationLedger {
        &mut self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &HPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mono: &Monomial) -> HPoly {
        self.terms.get(mono).cloned().unwrap_or_else(HPoly::zero)
    }

    /// Add `c * z^m zbar^n`, respecting the degree cap.
    pub fn add_term(&mut self, mono: Monomial, c: HPoly) {
        if c.is_zero() {
            return;
        }
        if mono.total_degree() > self.degree_cap {
            self.trunc.record(c.l1_mag());
            return;
        }
        let entry = self.terms.entry(mono).or_insert_with(HPoly::zero);
        entry.add_assign(&c);
        if entry.is_zero() {
            // remove exact cancellations
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn check_compatible(&self, other: &PolySymbol) -> Result<(), SymbolError> {
        if self.frame != other.frame {
            return Err(SymbolError::FrameMismatch);
        }
        if self.degree_cap != other.degree_cap {
            return Err(SymbolError::DegreeCapMismatch(
                self.degree_cap,
                other.degree_cap,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &PolySymbol) -> Result<PolySymbol, SymbolError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.trunc.merge(&other.trunc);
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolySymbol) -> Result<PolySymbol, SymbolError> {
        self.add(&other.scale(&cr(-Rat::one())))
    }

    pub fn scale(&self, s: &CRat) -> PolySymbol {
        let mut out = PolySymbol {
            frame: self.frame.clone(),
            degree_cap: self.degree_cap,
            terms: BTreeMap::new(),
            trunc: self.trunc,
        };
        if s.is_zero() {
            return out;
        }
        for (mono, c) in &self.terms {
            out.terms.insert(mono.clone(), c.scale(s));
        }
        out
    }

    pub fn scale_hpoly(&self, s: &HPoly) -> PolySymbol {
        let mut out = PolySymbol {
            frame: self.frame.clone(),
            degree_cap: self.degree_cap,
            terms: BTreeMap::new(),
            trunc: self.trunc,
        };
        for (mono, c) in &self.terms {
            let sc = c.mul(s);
            if !sc.is_zero() {
                out.terms.insert(mono.clone(), sc);
            }
        }
        out
    }

    /// Polynomial product, truncated at the degree cap.
    pub fn mul(&self, other: &PolySymbol) -> Result<PolySymbol, SymbolError> {
        self.check_compatible(other)?;
        let mut out = PolySymbol::zero(self.frame.clone(), self.degree_cap);
        out.trunc.merge(&self.trunc);
        out.trunc.merge(&other.trunc);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Vec<u8> = ma.m.iter().zip(&mb.m).map(|(a, b)| a + b).collect();
                let n: Vec<u8> = ma.n.iter().zip(&mb.n).map(|(a, b)| a + b).collect();
                out.add_term(Monomial::new(m, n), ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<PolySymbol, SymbolError> {
        let mut acc = PolySymbol::constant(self.frame.clone(), self.degree_cap, c_one());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Complex conjugate symbol: coefficients conjugated, m and n swapped.
    pub fn conj(&self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.frame.clone(), self.degree_cap);
        out.trunc = self.trunc;
        for (mono, c) in &self.terms {
            out.terms.insert(mono.conj(), c.conj());
        }
        out
    }

    /// A symbol is real iff coeff(n,m) = conj(coeff(m,n)) for all terms.
    pub fn is_real(&self) -> bool {
        self.terms
            .iter()
            .all(|(mono, c)| self.coeff(&mono.conj()) == c.conj())
    }

    /// Minimal total degree among stored terms (vanishing order at z = 0).
    pub fn vanishing_order(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).min()
    }

    /// Weighted vanishing order: min over terms of degree plus twice the
    /// leading parameter exponent. One semiclassical power trades for two
    /// phase-space degrees, matching the symbol-class grading, so bracket
    /// corrections preserve this order even as they lower the plain degree.
    pub fn weighted_vanishing_order(&self) -> Option<u32> {
        self.terms
            .iter()
            .map(|(mono, c)| mono.total_degree() + 2 * c.min_exp().unwrap_or(0))
            .min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// Angular Fourier component of order `k`; summing over all occurring
    /// indices reconstructs the symbol exactly.
    pub fn angular_project(&self, k: &[i64]) -> PolySymbol {
        let mut out = PolySymbol::zero(self.frame.clone(), self.degree_cap);
        for (mono, c) in &self.terms {
            if mono.angular_index() == k {
                out.terms.insert(mono.clone(), c.clone());
            }
        }
        out
    }

    /// All distinct angular indices occurring in the symbol.
    pub fn angular_support(&self) -> Vec<Vec<i64>> {
        let mut ks: Vec<Vec<i64>> = self
            .terms
            .keys()
            .map(|m| m.angular_index())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        ks.sort();
        ks
    }

    /// Sub-symbol of terms with angular index zero.
    pub fn normal_part(&self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.frame.clone(), self.degree_cap);
        for (mono, c) in &self.terms {
            if mono.is_action() {
                out.terms.insert(mono.clone(), c.clone());
            }
        }
        out
    }

    /// Sub-symbol of terms with nonzero angular index.
    pub fn oscillating_part(&self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.frame.clone(), self.degree_cap);
        for (mono, c) in &self.terms {
            if !mono.is_action() {
                out.terms.insert(mono.clone(), c.clone());
            }
        }
        out
    }

    /// Largest l1 coefficient mass among terms, parameter evaluated.
    pub fn max_coeff_mag(&self, hbar: f64) -> f64 {
        self.terms
            .values()
            .map(|c| {
                let v = c.eval_f64(hbar);
                v.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Sum of coefficient magnitudes at a numeric parameter value.
    pub fn l1_coeff_norm(&self, hbar: f64) -> f64 {
        self.terms.values().map(|c| c.eval_f64(hbar).norm()).sum()
    }

    /// Keep only the classical (parameter-degree-zero) part of every
    /// coefficient.
    pub fn hbar_degree0(&self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.frame.clone(), self.degree_cap);
        for (mono, c) in &self.terms {
            let c0 = c.degree0();
            if !c0.is_zero() {
                out.terms.insert(mono.clone(), c0);
            }
        }
        out
    }

    /// Evaluate at a numeric phase-space point given in frame coordinates
    /// `z_k = w_k x_k + i xi_k`.
    pub fn eval_z(&self, z: &[Complex<f64>], hbar: f64) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for (mono, c) in &self.terms {
            let mut v = c.eval_f64(hbar);
            for (k, zk) in z.iter().enumerate() {
                v *= zk.powi(mono.m[k] as i32) * zk.conj().powi(mono.n[k] as i32);
            }
            acc += v;
        }
        acc
    }

    /// Evaluate on the torus slice of given actions at angle zero
    /// (`z_k = sqrt(2 w_k I_k)`, real and nonnegative).
    pub fn eval_at_actions(&self, actions: &[f64], hbar: f64) -> Complex<f64> {
        let z: Vec<Complex<f64>> = self
            .frame
            .omega()
            .iter()
            .zip(actions)
            .map(|(w, &i)| Complex::new((2.0 * crate::num::rat_f64(w) * i).sqrt(), 0.0))
            .collect();
        self.eval_z(&z, hbar)
    }

    // ---- constructors for common symbols ----

    /// Coordinate symbol `x_k = (z_k + zbar_k) / (2 w_k)`.
    pub fn x(frame: &Frame, degree_cap: u32, k: usize) -> PolySymbol {
        let l = frame.l();
        let mut s = PolySymbol::zero(frame.clone(), degree_cap);
        let half_inv_w = cr(Rat::new(1.into(), 2.into()) / &frame.omega()[k]);
        let mut em = vec![0u8; l];
        em[k] = 1;
        s.add_term(
            Monomial::new(em.clone(), vec![0; l]),
            HPoly::constant(half_inv_w.clone()),
        );
        s.add_term(Monomial::new(vec![0; l], em), HPoly::constant(half_inv_w));
        s
    }

    /// Momentum symbol `xi_k = (z_k - zbar_k) / (2 i)`.
    pub fn xi(frame: &Frame, degree_cap: u32, k: usize) -> PolySymbol {
        let l = frame.l();
        let mut s = PolySymbol::zero(frame.clone(), degree_cap);
        let mut em = vec![0u8; l];
        em[k] = 1;
        // 1/(2i) = -i/2
        s.add_term(
            Monomial::new(em.clone(), vec![0; l]),
            HPoly::constant(cri(rat(-1, 2))),
        );
        s.add_term(
            Monomial::new(vec![0; l], em),
            HPoly::constant(cri(rat(1, 2))),
        );
        s
    }

    /// Action symbol `I_k = z_k zbar_k / (2 w_k)`.
    pub fn action(frame: &Frame, degree_cap: u32, k: usize) -> PolySymbol {
        let l = frame.l();
        let mut s = PolySymbol::zero(frame.clone(), degree_cap);
        let mut em = vec![0u8; l];
        em[k] = 1;
        let c = cr(Rat::new(1.into(), 2.into()) / &frame.omega()[k]);
        s.add_term(Monomial::new(em.clone(), em), HPoly::constant(c));
        s
    }

    /// Oscillator symbol `p0 = (|xi|^2 + |w x|^2)/2 = sum_k w_k I_k`.
    pub fn p0(frame: &Frame, degree_cap: u32) -> PolySymbol {
        let l = frame.l();
        let mut s = PolySymbol::zero(frame.clone(), degree_cap);
        for k in 0..l {
            let mut em = vec![0u8; l];
            em[k] = 1;
            s.add_term(
                Monomial::new(em.clone(), em),
                HPoly::constant(cr(rat(1, 2))),
            );
        }
        s
    }

    /// Quadratic action form `<c, I>` with rational coefficients.
    pub fn action_form(frame: &Frame, degree_cap: u32, coeffs: &[Rat]) -> PolySymbol {
        let l = frame.l();
        let mut s = PolySymbol::zero(frame.clone(), degree_cap);
        for k in 0..l {
            if coeffs[k].is_zero() {
                continue;
            }
            let mut em = vec![0u8; l];
            em[k] = 1;
            let c = cr(&coeffs[k] / (Rat::from_integer(2.into()) * &frame.omega()[k]));
            s.add_term(Monomial::new(em.clone(), em), HPoly::constant(c));
        }
        s
    }

    /// Power of a coordinate, `x_k^e`.
    pub fn x_power(frame: &Frame, degree_cap: u32, k: usize, e: u32) -> PolySymbol {
        PolySymbol::x(frame, degree_cap, k).pow(e).unwrap()
    }

    /// Monomial in positions and momenta, `prod x^a * prod xi^b`.
    pub fn from_xi_monomial(
        frame: &Frame,
        degree_cap: u32,
        xexp: &[u8],
        xiexp: &[u8],
        c: HPoly,
    ) -> Result<PolySymbol, SymbolError> {
        let mut acc = PolySymbol::constant(frame.clone(), degree_cap, c_one());
        for (k, &e) in xexp.iter().enumerate() {
            for _ in 0..e {
                acc = acc.mul(&PolySymbol::x(frame, degree_cap, k))?;
            }
        }
        for (k, &e) in xiexp.iter().enumerate() {
            for _ in 0..e {
                acc = acc.mul(&PolySymbol::xi(frame, degree_cap, k))?;
            }
        }
        Ok(acc.scale_hpoly(&c))
    }

    /// Evaluate the symbol at a real phase point given in `(x, xi)`
    /// coordinates.
    pub fn eval_xxi(&self, x: &[f64], xi: &[f64], hbar: f64) -> Complex<f64> {
        let z: Vec<Complex<f64>> = self
            .frame
            .omega()
            .iter()
            .zip(x.iter().zip(xi))
            .map(|(w, (&xv, &xiv))| Complex::new(crate::num::rat_f64(w) * xv, xiv))
            .collect();
        self.eval_z(&z, hbar)
    }

    /// Exact scalar value of a constant symbol.
    pub fn constant_term(&self) -> HPoly {
        self.coeff(&Monomial::unit(self.frame.l()))
    }

    /// Frame power `(2 w_k)^{e}` helper used by quantization routines.
    pub fn two_omega_pow(&self, k: usize, e: u32) -> Rat {
        rat_pow(
            &(Rat::from_integer(2.into()) * &self.frame.omega()[k]),
            e,
        )
    }
}

/// Reality helper: build a real symbol from one term plus its conjugate.
pub fn real_pair(frame: &Frame, degree_cap: u32, mono: Monomial, c: CRat) -> PolySymbol {
    let mut s = PolySymbol::zero(frame.clone(), degree_cap);
    let cc = conj(&c);
    let conj_mono = mono.conj();
    if conj_mono == mono {
        // self-conjugate monomial must carry a real coefficient
        s.add_term(mono, HPoly::constant(CRat::new(c.re, Rat::zero())));
    } else {
        s.add_term(mono, HPoly::constant(c));
        s.add_term(conj_mono, HPoly::constant(cc));
    }
    s
}
