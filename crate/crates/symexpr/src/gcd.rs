//! Multivariate polynomial gcd over `Q(i)`.
//!
//! Most gcds arising from rational-function arithmetic are trivial, so a
//! modular test runs first: the inputs are mapped to `F_p` (with `p ≡ 1 mod 4`
//! so that `i` has an image), all but one common atom are specialised to
//! random values, and univariate gcds are taken. If every common atom yields
//! a constant gcd the true gcd is constant. Only otherwise does the recursive
//! subresultant algorithm run. Nontrivial factors are remembered and tried
//! first on later inputs.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use once_cell::sync::Lazy;
use parking_lot::RwLock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atom::AtomId;
use crate::coeff::Coeff;
use crate::poly::Poly;

struct Field {
    p: u64,
    sqrt_m1: u64,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

static FIELD: Lazy<Field> = Lazy::new(|| {
    let mut p = (1u64 << 61) + 1;
    while !is_prime(p) {
        p += 4;
    }
    let mut c = 2;
    loop {
        let s = pow_mod(c, (p - 1) / 4, p);
        if mul_mod(s, s, p) == p - 1 {
            return Field { p, sqrt_m1: s };
        }
        c += 1;
    }
});

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn bigint_mod(n: &BigInt, p: u64) -> u64 {
    let r = (n % BigInt::from(p)).to_i128().expect("residue fits");
    if r < 0 {
        (r + p as i128) as u64
    } else {
        r as u64
    }
}

fn rat_mod(r: &num_rational::BigRational, p: u64) -> Option<u64> {
    if r.is_zero() {
        return Some(0);
    }
    let d = bigint_mod(r.denom(), p);
    if d == 0 {
        return None;
    }
    Some(mul_mod(bigint_mod(r.numer(), p), inv_mod(d, p), p))
}

fn coeff_mod(c: &Coeff, f: &Field) -> Option<u64> {
    let re = rat_mod(&c.re, f.p)?;
    let im = rat_mod(&c.im, f.p)?;
    Some((re + mul_mod(im, f.sqrt_m1, f.p)) % f.p)
}

/// Image of `a` in `F_p[x]` with every other atom replaced by `vals`.
fn image(a: &Poly, x: AtomId, vals: &HashMap<AtomId, u64>, f: &Field) -> Option<Vec<u64>> {
    let deg = a.degree_in(x) as usize;
    let mut out = vec![0u64; deg + 1];
    for (m, c) in a.terms() {
        let mut t = coeff_mod(c, f)?;
        let mut e = 0;
        for &(v, k) in m.0.iter() {
            if v == x {
                e = k as usize;
            } else {
                t = mul_mod(t, pow_mod(vals[&v], k as u64, f.p), f.p);
            }
        }
        out[e] = (out[e] + t) % f.p;
    }
    Some(out)
}

fn trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn uni_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> usize {
    trim(&mut a);
    trim(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if b.len() == 1 && b[0] == 0 {
            return a.len() - 1;
        }
        // a mod b
        let lb_inv = inv_mod(*b.last().unwrap(), p);
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let q = mul_mod(*a.last().unwrap(), lb_inv, p);
            let shift = a.len() - b.len();
            for (i, &bc) in b.iter().enumerate() {
                let sub = mul_mod(q, bc, p);
                a[i + shift] = (a[i + shift] + p - sub) % p;
            }
            a.pop();
            if a.is_empty() {
                a.push(0);
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// `true` when the gcd of `a` and `b` is certainly a constant.
fn coprime_certificate(a: &Poly, b: &Poly, common: &BTreeSet<AtomId>) -> bool {
    let f = &*FIELD;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (a.len() as u64) << 20 ^ b.len() as u64);
    let all: BTreeSet<AtomId> = a.vars().union(&b.vars()).copied().collect();
    for &x in common {
        let mut ok = false;
        for _attempt in 0..3 {
            let vals: HashMap<AtomId, u64> = all
                .iter()
                .map(|&v| (v, rng.gen_range(2..f.p - 1)))
                .collect();
            let (ia, ib) = match (image(a, x, &vals, f), image(b, x, &vals, f)) {
                (Some(ia), Some(ib)) => (ia, ib),
                _ => return false,
            };
            // a vanishing leading coefficient would hide a factor
            if *ia.last().unwrap() == 0 || *ib.last().unwrap() == 0 {
                continue;
            }
            if uni_gcd_degree(ia, ib, f.p) == 0 {
                ok = true;
            }
            break;
        }
        if !ok {
            return false;
        }
    }
    true
}

static FACTOR_CACHE: Lazy<RwLock<Vec<Poly>>> = Lazy::new(|| RwLock::new(Vec::new()));
const FACTOR_CACHE_CAP: usize = 512;

fn remember(f: &Poly) {
    if f.is_constant() {
        return;
    }
    let mut w = FACTOR_CACHE.write();
    if w.iter().any(|g| g == f) {
        return;
    }
    if w.len() >= FACTOR_CACHE_CAP {
        w.remove(0);
    }
    w.push(f.clone());
}

/// Scales so the leading coefficient (in the internal term order) is one.
pub fn make_monic(p: &Poly) -> Poly {
    match p.leading() {
        Some((_, c)) if !c.is_one() => p.scale(&c.inv()),
        _ => p.clone(),
    }
}

/// Greatest common divisor, normalised to leading coefficient one.
/// `gcd(0, 0)` is zero.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return make_monic(b);
    }
    if b.is_zero() {
        return make_monic(a);
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let mg = ma.gcd(&mb);
    let a1 = if ma.is_one() {
        a.clone()
    } else {
        a.div_mono(&ma)
    };
    let b1 = if mb.is_one() {
        b.clone()
    } else {
        b.div_mono(&mb)
    };
    let g = gcd_rec(&a1, &b1);
    make_monic(&g.mul_mono(&mg, &Coeff::one()))
}

/// gcd of polynomials without monomial content.
fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() <= b.len() {
        if let Some(_) = b.exact_div(a) {
            return make_monic(a);
        }
    } else if let Some(_) = a.exact_div(b) {
        return make_monic(b);
    }
    let va = a.vars();
    let vb = b.vars();
    // an atom present in only one argument splits that argument into
    // coefficients, all of which the gcd must divide
    if let Some(&x) = va.difference(&vb).next() {
        return gcd_with_coeffs(b, a, x);
    }
    if let Some(&x) = vb.difference(&va).next() {
        return gcd_with_coeffs(a, b, x);
    }
    let common: BTreeSet<AtomId> = va.intersection(&vb).copied().collect();
    if coprime_certificate(a, b, &common) {
        return Poly::one();
    }

    // peel off factors seen before
    let cached: Vec<Poly> = FACTOR_CACHE.read().clone();
    let mut acc = Poly::one();
    let (mut ra, mut rb) = (a.clone(), b.clone());
    let mut progress = false;
    for f in cached.iter().rev() {
        if !f.vars().is_subset(&common) {
            continue;
        }
        loop {
            if ra.is_constant() || rb.is_constant() {
                break;
            }
            match (ra.exact_div(f), rb.exact_div(f)) {
                (Some(qa), Some(qb)) => {
                    ra = qa;
                    rb = qb;
                    acc = &acc * f;
                    progress = true;
                }
                _ => break,
            }
        }
    }
    if progress {
        let rest = gcd(&ra, &rb);
        return make_monic(&(&acc * &rest));
    }

    let x = *common
        .iter()
        .min_by_key(|&&v| a.degree_in(v).max(b.degree_in(v)))
        .unwrap();
    let ua = a.to_univariate(x);
    let ub = b.to_univariate(x);
    let ca = content(&ua);
    let cb = content(&ub);
    let c = gcd(&ca, &cb);
    let pa: Vec<Poly> = ua
        .iter()
        .map(|p| p.exact_div(&ca).expect("content divides"))
        .collect();
    let pb: Vec<Poly> = ub
        .iter()
        .map(|p| p.exact_div(&cb).expect("content divides"))
        .collect();
    let g = subresultant(pa, pb);
    let g = make_monic(&Poly::from_univariate(x, &g));
    if !g.is_constant() {
        remember(&g);
    }
    make_monic(&(&c * &g))
}

fn gcd_with_coeffs(target: &Poly, split: &Poly, x: AtomId) -> Poly {
    let mut g = make_monic(target);
    for c in split.to_univariate(x) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn content(u: &[Poly]) -> Poly {
    let mut g = Poly::zero();
    for c in u {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn deg(u: &[Poly]) -> usize {
    u.len() - 1
}

fn trim_uni(u: &mut Vec<Poly>) {
    while u.len() > 1 && u.last().unwrap().is_zero() {
        u.pop();
    }
}

fn is_zero_uni(u: &[Poly]) -> bool {
    u.iter().all(Poly::is_zero)
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) · a mod b`.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let mut r = a.to_vec();
    let db = deg(b);
    let lb = b.last().unwrap().clone();
    let mut e = deg(a) as i64 - db as i64 + 1;
    while !is_zero_uni(&r) && deg(&r) >= db {
        let lr = r.last().unwrap().clone();
        let shift = deg(&r) - db;
        for c in r.iter_mut() {
            *c = &*c * &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] = &r[i + shift] - &(bc * &lr);
        }
        r.pop();
        if r.is_empty() {
            r.push(Poly::zero());
        }
        trim_uni(&mut r);
        e -= 1;
    }
    if e > 0 {
        let f = lb.pow(e as u32);
        for c in r.iter_mut() {
            *c = &*c * &f;
        }
    }
    r
}

fn subresultant(mut a: Vec<Poly>, mut b: Vec<Poly>) -> Vec<Poly> {
    trim_uni(&mut a);
    trim_uni(&mut b);
    if deg(&a) < deg(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let d = deg(&a) - deg(&b);
        let r = prem(&a, &b);
        if is_zero_uni(&r) {
            let c = content(&b);
            return b
                .iter()
                .map(|p| p.exact_div(&c).expect("content divides"))
                .collect();
        }
        if deg(&r) == 0 {
            return vec![Poly::one()];
        }
        a = b;
        let div = &g * &h.pow(d as u32);
        b = r
            .iter()
            .map(|p| p.exact_div(&div).expect("subresultant division"))
            .collect();
        g = a.last().unwrap().clone();
        h = if d == 0 {
            h
        } else {
            let num = g.pow(d as u32);
            let den = h.pow(d as u32 - 1);
            num.exact_div(&den).expect("subresultant division")
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::var_id;

    fn v(n: &str) -> Poly {
        Poly::atom(var_id(n))
    }

    #[test]
    fn field_has_square_root_of_minus_one() {
        let f = &*FIELD;
        assert_eq!(mul_mod(f.sqrt_m1, f.sqrt_m1, f.p), f.p - 1);
        assert_eq!(f.p % 4, 1);
    }

    #[test]
    fn common_factor_recovered() {
        let x = v("gx");
        let y = v("gy");
        let one = Poly::one();
        let f = &(&x * &y) + &one;
        let a = &f * &(&x + &y);
        let b = &f * &(&x - &one);
        let g = gcd(&a, &b);
        assert_eq!(g, make_monic(&f));
    }

    #[test]
    fn coprime_detected() {
        let x = v("gx");
        let y = v("gy");
        let a = &(&x * &x) + &y;
        let b = &(&y * &y) + &x;
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn gaussian_factor() {
        // x^2 + 1 = (x + i)(x - i)
        let x = v("gx");
        let i = Poly::constant(Coeff::i());
        let a = &(&x * &x) + &Poly::one();
        let b = &(&x + &i) * &(&x + &Poly::constant(Coeff::from_int(3)));
        let g = gcd(&a, &b);
        assert_eq!(g, &x + &i);
    }

    #[test]
    fn square_and_derivative() {
        let z = v("gz");
        let w = v("gw");
        let q = &(&z * &w) + &Poly::one();
        let a = q.pow(2);
        let b = a.partial(var_id("gz"));
        assert_eq!(gcd(&a, &b), make_monic(&q));
    }
}
