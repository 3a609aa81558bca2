//! Poisson and Moyal brackets in the complexified frame.
//!
//! In frame coordinates the canonical bracket reads
//! `{f,g} = sum_k 2 i w_k (d_zbar f d_z g - d_z f d_zbar g)`,
//! normalized so that time evolution is `df/dt = {f, p0}` and the frame
//! coordinates rotate as `z_k(t) = z_k e^{-i w_k t}`. The Moyal bracket is
//! the odd bidifferential (sine) series in powers of the semiclassical
//! parameter; on polynomials it terminates, and it reduces to the Poisson
//! bracket exactly when either argument is quadratic.

use super::{Frame, Monomial, PolySymbol, SymbolError};
use crate::num::{big_factorial, cr, CRat, HPoly, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Falling factorial m (m-1) ... (m-c+1); zero when c > m.
fn falling(m: u8, c: u8) -> BigInt {
    if c > m {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..c {
        acc *= BigInt::from((m - i) as u64);
    }
    acc
}

/// i^p as an exact complex rational.
fn i_pow(p: u32) -> CRat {
    match p % 4 {
        0 => CRat::new(Rat::one(), Rat::zero()),
        1 => CRat::new(Rat::zero(), Rat::one()),
        2 => CRat::new(-Rat::one(), Rat::zero()),
        _ => CRat::new(Rat::zero(), -Rat::one()),
    }
}

/// All (a, b) multi-index pairs over l modes with |a| + |b| = r.
fn derivative_patterns(l: usize, r: u8) -> Vec<(Vec<u8>, Vec<u8>)> {
    let slots = 2 * l;
    let mut out = Vec::new();
    let mut cur = vec![0u8; slots];
    fn rec(cur: &mut Vec<u8>, idx: usize, remaining: u8, out: &mut Vec<(Vec<u8>, Vec<u8>)>, l: usize) {
        if idx == cur.len() - 1 {
            cur[idx] = remaining;
            out.push((cur[..l].to_vec(), cur[l..].to_vec()));
            return;
        }
        for v in 0..=remaining {
            cur[idx] = v;
            rec(cur, idx + 1, remaining - v, out, l);
        }
    }
    rec(&mut cur, 0, r, &mut out, l);
    out
}

/// r-th power of the canonical bidifferential applied to (f, g).
///
/// Expanded per mode, the r-fold operator contributes
/// `r!/(prod a_k! b_k!) * prod (2 i w_k)^{a_k+b_k} * (-1)^{|b|}
///  * (dzbar^a dz^b f) (dz^a dzbar^b g)`.
fn bidifferential_pow(
    f: &PolySymbol,
    g: &PolySymbol,
    r: u8,
    frame: &Frame,
    cap: u32,
) -> PolySymbol {
    let l = frame.l();
    let mut out = PolySymbol::zero(frame.clone(), cap);
    let patterns = derivative_patterns(l, r);
    let r_fact = big_factorial(r as u64);
    for (a, b) in &patterns {
        // combinatorial weight r!/(prod a! b!)
        let mut weight = r_fact.clone();
        for k in 0..l {
            weight /= big_factorial(a[k] as u64) * big_factorial(b[k] as u64);
        }
        // frame factor prod (2 i w_k)^{a_k+b_k} * (-1)^{|b|}
        let total_i: u32 = a.iter().chain(b.iter()).map(|&v| v as u32).sum();
        let mut frame_factor = i_pow(total_i);
        let mut rat_factor = Rat::from(weight);
        for k in 0..l {
            let p = (a[k] + b[k]) as u32;
            let two_w = Rat::from_integer(2.into()) * &frame.omega()[k];
            rat_factor *= crate::num::rat_pow(&two_w, p);
        }
        let b_sum: u32 = b.iter().map(|&v| v as u32).sum();
        if b_sum % 2 == 1 {
            rat_factor = -rat_factor;
        }
        frame_factor = frame_factor * cr(rat_factor);
        if frame_factor.is_zero() {
            continue;
        }

        for (mf, cf) in f.terms() {
            // d_zbar^a d_z^b on f
            let mut ffac = BigInt::one();
            let mut ok = true;
            for k in 0..l {
                let fa = falling(mf.n[k], a[k]);
                let fb = falling(mf.m[k], b[k]);
                if fa.is_zero() && a[k] > 0 || fb.is_zero() && b[k] > 0 {
                    ok = false;
                    break;
                }
                ffac *= fa * fb;
            }
            if !ok || ffac.is_zero() {
                continue;
            }
            let fm: Vec<u8> = mf.m.iter().zip(b).map(|(x, d)| x - d).collect();
            let fn_: Vec<u8> = mf.n.iter().zip(a).map(|(x, d)| x - d).collect();

            for (mg, cg) in g.terms() {
                // d_z^a d_zbar^b on g
                let mut gfac = BigInt::one();
                let mut ok = true;
                for k in 0..l {
                    let ga = falling(mg.m[k], a[k]);
                    let gb = falling(mg.n[k], b[k]);
                    if ga.is_zero() && a[k] > 0 || gb.is_zero() && b[k] > 0 {
                        ok = false;
                        break;
                    }
                    gfac *= ga * gb;
                }
                if !ok || gfac.is_zero() {
                    continue;
                }
                let gm: Vec<u8> = mg.m.iter().zip(a).map(|(x, d)| x - d).collect();
                let gn: Vec<u8> = mg.n.iter().zip(b).map(|(x, d)| x - d).collect();

                let mono = Monomial::new(
                    fm.iter().zip(&gm).map(|(x, y)| x + y).collect(),
                    fn_.iter().zip(&gn).map(|(x, y)| x + y).collect(),
                );
                let scalar = &frame_factor * cr(Rat::from(&ffac * &gfac));
                out.add_term(mono, cf.mul(cg).scale(&scalar));
            }
        }
    }
    out
}

/// Canonical Poisson bracket, exact, truncated at the common degree cap.
pub fn poisson_bracket(f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol, SymbolError> {
    f.check_compatible(g)?;
    let mut out = bidifferential_pow(f, g, 1, f.frame(), f.degree_cap());
    out.trunc_mut().merge(f.trunc());
    out.trunc_mut().merge(g.trunc());
    Ok(out)
}

/// Moyal bracket: the terminating sine series
/// `sum_j (-1)^j / (2j+1)! * (hbar/2)^{2j} * Lambda^{2j+1}(f, g)`.
///
/// The parameter-degree-zero part is exactly the Poisson bracket;
/// corrections carry even powers starting at two.
pub fn moyal_bracket(f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol, SymbolError> {
    f.check_compatible(g)?;
    let mut out = PolySymbol::zero(f.frame().clone(), f.degree_cap());
    out.trunc_mut().merge(f.trunc());
    out.trunc_mut().merge(g.trunc());
    let max_r = f
        .max_degree()
        .unwrap_or(0)
        .min(g.max_degree().unwrap_or(0));
    let mut j = 0u32;
    loop {
        let r = 2 * j + 1;
        if r > max_r {
            break;
        }
        let lam = bidifferential_pow(f, g, r as u8, f.frame(), f.degree_cap());
        if !lam.is_zero() {
            // (-1)^j / (2j+1)! / 4^j, attached to parameter power 2j
            let mut c = Rat::one() / Rat::from(big_factorial(r as u64));
            c /= crate::num::rat_pow(&Rat::from_integer(4.into()), j);
            if j % 2 == 1 {
                c = -c;
            }
            let coeff = HPoly::term(cr(c), 2 * j);
            out = out.add(&lam.scale_hpoly(&coeff))?;
        }
        j += 1;
    }
    Ok(out)
}
