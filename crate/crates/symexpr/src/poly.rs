//! Sparse multivariate polynomials over `Q(i)` in interned atoms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::atom::AtomId;
use crate::coeff::Coeff;

/// A power product, stored as `(atom, exponent)` pairs sorted by atom id.
///
/// `Ord` is the lexicographic monomial order in which a smaller atom id has
/// higher priority. It is compatible with multiplication.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(pub SmallVec<[(AtomId, u32); 4]>);

impl Mono {
    pub fn one() -> Self {
        Mono(SmallVec::new())
    }

    pub fn var(id: AtomId, e: u32) -> Self {
        let mut v = SmallVec::new();
        if e > 0 {
            v.push((id, e));
        }
        Mono(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exp_of(&self, id: AtomId) -> u32 {
        self.0
            .iter()
            .find(|&&(v, _)| v == id)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let (a, b) = (&self.0, &o.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / o` if `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut out = SmallVec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in self.0.iter() {
            if j < o.0.len() && o.0[j].0 < v {
                return None;
            }
            if j < o.0.len() && o.0[j].0 == v {
                let f = o.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v, e - f)),
                }
            } else {
                out.push((v, e));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut out = SmallVec::new();
        let mut j = 0;
        for &(v, e) in self.0.iter() {
            while j < o.0.len() && o.0[j].0 < v {
                j += 1;
            }
            if j < o.0.len() && o.0[j].0 == v {
                out.push((v, e.min(o.0[j].1)));
            }
        }
        Mono(out)
    }

    pub fn without(&self, id: AtomId) -> Mono {
        Mono(self.0.iter().copied().filter(|&(v, _)| v != id).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        let (a, b) = (&self.0, &o.0);
        let n = a.len().min(b.len());
        for k in 0..n {
            if a[k].0 != b[k].0 {
                // the side holding the smaller id has a positive exponent where
                // the other has zero
                return if a[k].0 < b[k].0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
            if a[k].1 != b[k].1 {
                return a[k].1.cmp(&b[k].1);
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Polynomial with terms sorted in decreasing monomial order; no zero
/// coefficients are stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: Vec<(Mono, Coeff)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Mono::one(), c)],
            }
        }
    }

    pub fn atom(id: AtomId) -> Self {
        Poly {
            terms: vec![(Mono::var(id, 1), Coeff::one())],
        }
    }

    pub fn monomial(m: Mono, c: Coeff) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(m, c)],
            }
        }
    }

    /// Builds from arbitrary terms, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Mono, Coeff)>>(it: I) -> Self {
        let mut acc: HashMap<Mono, Coeff> = HashMap::new();
        for (m, c) in it {
            match acc.get_mut(&m) {
                Some(x) => *x = &*x + &c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Mono, Coeff>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Mono, Coeff)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    /// The constant value if the polynomial has no atoms (zero counts).
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<&(Mono, Coeff)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<AtomId> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for &(v, _) in m.0.iter() {
                s.insert(v);
            }
        }
        s
    }

    pub fn contains_var(&self, id: AtomId) -> bool {
        self.terms.iter().any(|(m, _)| m.exp_of(id) > 0)
    }

    pub fn degree_in(&self, id: AtomId) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.exp_of(id))
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Coeff) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(n, x)| (n.mul(m), x * c)).collect(),
        }
    }

    /// Divides every term by `m`; caller guarantees divisibility.
    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.div(m).expect("monomial divides every term"), c.clone()))
                .collect(),
        }
    }

    /// Largest monomial dividing every term.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let first = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Mono::one(),
        };
        it.fold(first, |acc, (m, _)| acc.gcd(m))
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative with respect to an atom treated as independent.
    pub fn partial(&self, id: AtomId) -> Poly {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exp_of(id);
            if e == 0 {
                continue;
            }
            let mut n = m.without(id);
            if e > 1 {
                n = n.mul(&Mono::var(id, e - 1));
            }
            out.push((n, c * &Coeff::from_int(e as i64)));
        }
        Poly::from_terms(out)
    }

    /// Splits into coefficients of powers of `id` (index = exponent).
    pub fn to_univariate(&self, id: AtomId) -> Vec<Poly> {
        let deg = self.degree_in(id) as usize;
        let mut buckets: Vec<Vec<(Mono, Coeff)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exp_of(id) as usize;
            buckets[e].push((m.without(id), c.clone()));
        }
        // sub-sequences of a sorted sequence with one variable removed stay
        // sorted because the removed exponent is constant in each bucket
        buckets.into_iter().map(|terms| Poly { terms }).collect()
    }

    pub fn from_univariate(id: AtomId, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (e, p) in coeffs.iter().enumerate() {
            let xm = Mono::var(id, e as u32);
            for (m, c) in &p.terms {
                terms.push((m.mul(&xm), c.clone()));
            }
        }
        let mut p = Poly { terms };
        p.terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        p
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.inv()));
        }
        if d.terms.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let inv = dc.inv();
            let mut out = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                out.push((m.div(dm)?, c * &inv));
            }
            return Some(Poly { terms: out });
        }
        // cheap degree screens
        for (v, _) in d.terms.iter().flat_map(|(m, _)| m.0.iter()) {
            if self.degree_in(*v) < d.degree_in(*v) {
                return None;
            }
        }
        let (dm, dc) = &d.terms[0];
        let dinv = dc.inv();
        let mut rem: BTreeMap<Mono, Coeff> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((lm, lc)) = rem.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = lm.div(dm)?;
            let qc = &lc * &dinv;
            for (m, c) in &d.terms {
                let key = m.mul(&qm);
                let delta = c * &qc;
                match rem.get_mut(&key) {
                    Some(x) => {
                        *x = &*x - &delta;
                        if x.is_zero() {
                            rem.remove(&key);
                        }
                    }
                    None => {
                        rem.insert(key, -delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        quot.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Some(Poly { terms: quot })
    }

    pub fn map_coeffs<F: Fn(&Coeff) -> Coeff>(&self, f: F) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Multiplies by the common denominator of all coefficients.
    pub fn clear_denominators(&self) -> (Poly, num_bigint::BigInt) {
        use num_integer::Integer;
        let mut l = num_bigint::BigInt::from(1);
        for (_, c) in &self.terms {
            l = l.lcm(&c.denom_lcm());
        }
        let s = Coeff::from_rational(num_rational::BigRational::from_integer(l.clone()));
        (self.scale(&s), l)
    }

    /// Evaluates with a value for every atom occurring.
    pub fn eval<T, F>(&self, mut atom_val: F, from_coeff: impl Fn(&Coeff) -> T) -> T
    where
        T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
        F: FnMut(AtomId) -> T,
    {
        let mut cache: HashMap<AtomId, T> = HashMap::new();
        let mut acc: Option<T> = None;
        for (m, c) in &self.terms {
            let mut t = from_coeff(c);
            for &(v, e) in m.0.iter() {
                let x = cache.entry(v).or_insert_with(|| atom_val(v)).clone();
                for _ in 0..e {
                    t = t * x.clone();
                }
            }
            acc = Some(match acc {
                None => t,
                Some(a) => a + t,
            });
        }
        acc.unwrap_or_else(|| from_coeff(&Coeff::zero()))
    }
}

fn merge(a: &[(Mono, Coeff)], b: &[(Mono, Coeff)], negate_b: bool) -> Vec<(Mono, Coeff)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0.clone(), c));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b {
                    &a[i].1 - &b[j].1
                } else {
                    &a[i].1 + &b[j].1
                };
                if !c.is_zero() {
                    out.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for t in &b[j..] {
        let c = if negate_b { -&t.1 } else { t.1.clone() };
        out.push((t.0.clone(), c));
    }
    out
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        Poly {
            terms: merge(&self.terms, &o.terms, false),
        }
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        Poly {
            terms: merge(&self.terms, &o.terms, true),
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.terms.len() == 1 {
            return self.mul_mono(&o.terms[0].0, &o.terms[0].1);
        }
        if self.terms.len() == 1 {
            return o.mul_mono(&self.terms[0].0, &self.terms[0].1);
        }
        let (small, big) = if self.terms.len() <= o.terms.len() {
            (self, o)
        } else {
            (o, self)
        };
        let mut acc: HashMap<Mono, Coeff> = HashMap::with_capacity(big.terms.len() * 2);
        for (m1, c1) in &small.terms {
            for (m2, c2) in &big.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                match acc.get_mut(&m) {
                    Some(x) => *x = &*x + &c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Poly::from_map(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::atom(1_000_001)
    }
    fn y() -> Poly {
        Poly::atom(1_000_002)
    }

    #[test]
    fn mono_order_is_multiplicative() {
        let a = Mono::var(1, 1);
        let b = Mono::var(2, 1);
        assert!(a > b);
        let c = Mono::var(1, 1);
        assert!(a.mul(&c) > b.mul(&c));
    }

    #[test]
    fn exact_division() {
        let p = &(&x() + &y()) * &(&x() - &y());
        let q = p.exact_div(&(&x() + &y())).unwrap();
        assert_eq!(q, &x() - &y());
        assert!(p.exact_div(&(&x() + &Poly::one())).is_none());
    }

    #[test]
    fn square_of_binomial() {
        let one = Poly::one();
        let s = (&x() + &one).pow(2);
        let e = &(&(&x() * &x()) + &x().scale(&Coeff::from_int(2))) + &one;
        assert!((&s - &e).is_zero());
    }
}
