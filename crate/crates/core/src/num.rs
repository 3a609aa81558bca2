//! Exact scalar types shared across the crate.
//!
//! `Rat` is an arbitrary-precision rational, `CRat` its complexification,
//! and [`HPoly`] a polynomial in the semiclassical parameter with `CRat`
//! coefficients. Symbol coefficients are `HPoly` values, so every algebraic
//! operation in the crate is exact until a value is explicitly evaluated.

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Rat = BigRational;
pub type CRat = Complex<Rat>;

/// Rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Real complex rational.
pub fn cr(re: Rat) -> CRat {
    Complex::new(re, Rat::zero())
}

/// Purely imaginary complex rational.
pub fn cri(im: Rat) -> CRat {
    Complex::new(Rat::zero(), im)
}

pub fn c_one() -> CRat {
    cr(Rat::one())
}

pub fn c_zero() -> CRat {
    Complex::new(Rat::zero(), Rat::zero())
}

pub fn conj(c: &CRat) -> CRat {
    Complex::new(c.re.clone(), -c.im.clone())
}

/// Squared modulus, exact.
pub fn abs_sq(c: &CRat) -> Rat {
    &c.re * &c.re + &c.im * &c.im
}

/// Parse a rational from "p", "p/q", or a plain decimal like "-0.25".
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let den: BigInt = q.trim().parse().map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|e| format!("bad decimal {s:?}: {e}"))?
        };
        let digits = frac.trim();
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal fraction in {s:?}"));
        }
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let frac_num: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|e| format!("bad decimal {s:?}: {e}"))?
        };
        let signed_frac = if neg { -frac_num } else { frac_num };
        return Ok(Rat::from(int_part) + Rat::new(signed_frac, scale));
    }
    let num: BigInt = s.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
    Ok(Rat::from(num))
}

/// Render as "p/q" (or "p" when integral); inverse of [`parse_rat`].
pub fn rat_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Natural log of |n| that stays finite when `n` overflows f64.
pub fn ln_big(n: &BigInt) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 52 {
        return (n.abs().to_f64().unwrap()).ln();
    }
    let shift = bits - 52;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of |r|; `-inf` for zero.
pub fn ln_rat_abs(r: &Rat) -> f64 {
    ln_big(r.numer()) - ln_big(r.denom())
}

/// f64 of a rational, falling back to log-space when parts overflow.
pub fn rat_f64(r: &Rat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(v) = r.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rat_abs(r).exp()
}

pub fn c_f64(c: &CRat) -> Complex<f64> {
    Complex::new(rat_f64(&c.re), rat_f64(&c.im))
}

/// Exact nonnegative integer power of a rational.
pub fn rat_pow(r: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}

pub fn big_factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Rising product (j+1)(j+2)...(j+c) as a big integer.
pub fn rising(j: u64, c: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 1..=c {
        acc *= BigInt::from(j + i);
    }
    acc
}

/// Polynomial in the semiclassical parameter with exact complex-rational
/// coefficients, keyed by exponent. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct HPoly(BTreeMap<u32, CRat>);

impl HPoly {
    pub fn zero() -> Self {
        HPoly(BTreeMap::new())
    }

    pub fn constant(c: CRat) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(0, c);
        }
        HPoly(m)
    }

    pub fn one() -> Self {
        Self::constant(c_one())
    }

    /// c * hbar^e
    pub fn term(c: CRat, e: u32) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(e, c);
        }
        HPoly(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u32, &CRat)> {
        self.0.iter()
    }

    pub fn coeff(&self, e: u32) -> CRat {
        self.0.get(&e).cloned().unwrap_or_else(c_zero)
    }

    pub fn min_exp(&self) -> Option<u32> {
        self.0.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<u32> {
        self.0.keys().next_back().copied()
    }

    pub fn add_assign(&mut self, other: &HPoly) {
        for (e, c) in &other.0 {
            let entry = self.0.entry(*e).or_insert_with(c_zero);
            *entry += c;
            if entry.is_zero() {
                self.0.remove(e);
            }
        }
    }

    pub fn add(&self, other: &HPoly) -> HPoly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &HPoly) -> HPoly {
        let mut out = self.clone();
        for (e, c) in &other.0 {
            let entry = out.0.entry(*e).or_insert_with(c_zero);
            *entry -= c;
            if entry.is_zero() {
                out.0.remove(e);
            }
        }
        out
    }

    pub fn neg(&self) -> HPoly {
        HPoly(self.0.iter().map(|(e, c)| (*e, -c.clone())).collect())
    }

    pub fn scale(&self, s: &CRat) -> HPoly {
        if s.is_zero() {
            return HPoly::zero();
        }
        HPoly(self.0.iter().map(|(e, c)| (*e, c * s)).collect())
    }

    pub fn mul(&self, other: &HPoly) -> HPoly {
        let mut out = HPoly::zero();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &other.0 {
                let entry = out.0.entry(e1 + e2).or_insert_with(c_zero);
                *entry += c1 * c2;
            }
        }
        out.0.retain(|_, c| !c.is_zero());
        out
    }

    pub fn mul_hbar_pow(&self, e: u32) -> HPoly {
        HPoly(self.0.iter().map(|(k, c)| (k + e, c.clone())).collect())
    }

    pub fn conj(&self) -> HPoly {
        HPoly(self.0.iter().map(|(e, c)| (*e, conj(c))).collect())
    }

    /// Exact evaluation at a rational value of the parameter.
    pub fn eval(&self, hbar: &Rat) -> CRat {
        let mut acc = c_zero();
        for (e, c) in &self.0 {
            acc += c * cr(rat_pow(hbar, *e));
        }
        acc
    }

    pub fn eval_f64(&self, hbar: f64) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for (e, c) in &self.0 {
            acc += c_f64(c) * hbar.powi(*e as i32);
        }
        acc
    }

    /// Sub-polynomial of exponents strictly below `e`.
    pub fn truncate_below(&self, e: u32) -> HPoly {
        HPoly(self.0.range(..e).map(|(k, c)| (*k, c.clone())).collect())
    }

    /// Coefficient of exponent zero, as a polynomial (the "classical part").
    pub fn degree0(&self) -> HPoly {
        HPoly(self.0.range(..1).map(|(k, c)| (*k, c.clone())).collect())
    }

    /// l1 mass of the coefficients (parameter set to 1); a size proxy.
    pub fn l1_mag(&self) -> f64 {
        self.0
            .values()
            .map(|c| rat_f64(&c.re).abs() + rat_f64(&c.im).abs())
            .sum()
    }

    pub fn is_real(&self) -> bool {
        self.0.values().all(|c| c.im.is_zero())
    }
}

impl fmt::Debug for HPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(e, c)| {
                let cs = if c.im.is_zero() {
                    rat_string(&c.re)
                } else {
                    format!("({}+{}i)", rat_string(&c.re), rat_string(&c.im))
                };
                match e {
                    0 => cs,
                    1 => format!("{cs}*h"),
                    _ => format!("{cs}*h^{e}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Sign helper for exact BigInt construction.
pub fn bigint_from_sign_parts(sign_negative: bool, mag: BigInt) -> BigInt {
    if sign_negative {
        BigInt::from_biguint(Sign::Minus, mag.magnitude().clone())
    } else {
        mag
    }
}

/// Serialize a rational as its "p/q" string form.
pub fn serialize_rat<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_string(r))
}
