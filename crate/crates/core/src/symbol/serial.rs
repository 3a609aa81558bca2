//! Plain-text serialization of symbols.
//!
//! A symbol is a list of term records `{m, n, coeff}` where `coeff` is a list
//! of `[exponent, numerator, denominator]` triples (one per power of the
//! semiclassical parameter). Complex coefficients extend the triple to
//! `[exponent, re_num, re_den, im_num, im_den]`. Numerators and denominators
//! are decimal strings so arbitrary precision survives the round trip.

use super::{Frame, Monomial, PolySymbol, SymbolError};
use crate::num::{parse_rat, rat_string, CRat, HPoly, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CoeffEntry {
    Real(u32, String, String),
    Complex(u32, String, String, String, String),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermRepr {
    pub m: Vec<u8>,
    pub n: Vec<u8>,
    pub coeff: Vec<CoeffEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymbolRepr {
    pub l: usize,
    pub omega: Vec<String>,
    pub degree_cap: u32,
    pub terms: Vec<TermRepr>,
}

impl SymbolRepr {
    pub fn from_symbol(s: &PolySymbol) -> Self {
        let terms = s
            .terms()
            .map(|(mono, c)| {
                let coeff = c
                    .iter()
                    .map(|(e, v)| {
                        if v.im.is_zero() {
                            CoeffEntry::Real(
                                *e,
                                v.re.numer().to_string(),
                                v.re.denom().to_string(),
                            )
                        } else {
                            CoeffEntry::Complex(
                                *e,
                                v.re.numer().to_string(),
                                v.re.denom().to_string(),
                                v.im.numer().to_string(),
                                v.im.denom().to_string(),
                            )
                        }
                    })
                    .collect();
                TermRepr {
                    m: mono.m.clone(),
                    n: mono.n.clone(),
                    coeff,
                }
            })
            .collect();
        SymbolRepr {
            l: s.frame().l(),
            omega: s.frame().omega().iter().map(rat_string).collect(),
            degree_cap: s.degree_cap(),
            terms,
        }
    }

    pub fn to_symbol(&self) -> Result<PolySymbol, SymbolError> {
        let omega: Result<Vec<Rat>, _> = self.omega.iter().map(|s| parse_rat(s)).collect();
        let omega = omega.map_err(SymbolError::BadRepr)?;
        if omega.len() != self.l {
            return Err(SymbolError::BadRepr(format!(
                "l = {} but {} frequencies given",
                self.l,
                omega.len()
            )));
        }
        let frame = Frame::new(omega)?;
        let mut out = PolySymbol::zero(frame, self.degree_cap);
        for term in &self.terms {
            if term.m.len() != self.l || term.n.len() != self.l {
                return Err(SymbolError::BadRepr(format!(
                    "term multi-index arity != l: {:?}/{:?}",
                    term.m, term.n
                )));
            }
            let mut c = HPoly::zero();
            for entry in &term.coeff {
                let (e, v) = match entry {
                    CoeffEntry::Real(e, num, den) => {
                        let num = parse_rat(num).map_err(SymbolError::BadRepr)?;
                        let den = parse_rat(den).map_err(SymbolError::BadRepr)?;
                        if den.is_zero() {
                            return Err(SymbolError::BadRepr("zero denominator".into()));
                        }
                        (*e, CRat::new(num / den, Rat::zero()))
                    }
                    CoeffEntry::Complex(e, rn, rd, im_n, im_d) => {
                        let rn = parse_rat(rn).map_err(SymbolError::BadRepr)?;
                        let rd = parse_rat(rd).map_err(SymbolError::BadRepr)?;
                        let im_n = parse_rat(im_n).map_err(SymbolError::BadRepr)?;
                        let im_d = parse_rat(im_d).map_err(SymbolError::BadRepr)?;
                        if rd.is_zero() || im_d.is_zero() {
                            return Err(SymbolError::BadRepr("zero denominator".into()));
                        }
                        (*e, CRat::new(rn / rd, im_n / im_d))
                    }
                };
                c.add_assign(&HPoly::term(v, e));
            }
            out.add_term(Monomial::new(term.m.clone(), term.n.clone()), c);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("symbol repr serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SymbolError> {
        serde_json::from_str(s).map_err(|e| SymbolError::BadRepr(e.to_string()))
    }
}
