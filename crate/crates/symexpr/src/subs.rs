//! Substitution of atoms by rational functions.

use std::collections::HashMap;

use crate::atom::{self, Atom, AtomId};
use crate::coeff::Coeff;
use crate::error::ExprError;
use crate::expr::{Expr, Func, Symbol};
use crate::poly::{Mono, Poly};
use crate::ratfunc::RatFunc;

/// Evaluates `p` with atoms replaced by the given rational functions (atoms
/// missing from `vals` stay). Returns an unreduced numerator/denominator pair.
fn poly_subst(p: &Poly, vals: &HashMap<AtomId, RatFunc>) -> (Poly, Poly) {
    let mut maxdeg: HashMap<AtomId, u32> = HashMap::new();
    for (m, _) in p.terms() {
        for &(v, e) in m.0.iter() {
            if vals.contains_key(&v) {
                let d = maxdeg.entry(v).or_insert(0);
                *d = (*d).max(e);
            }
        }
    }
    let mut pow_cache: HashMap<(AtomId, bool, u32), Poly> = HashMap::new();
    let mut pw = |v: AtomId, den: bool, e: u32| -> Poly {
        pow_cache
            .entry((v, den, e))
            .or_insert_with(|| {
                let r = &vals[&v];
                let base = if den { r.den() } else { r.num() };
                base.pow(e)
            })
            .clone()
    };
    let mut common = Poly::one();
    for (&v, &d) in &maxdeg {
        if !vals[&v].den().is_one() {
            common = &common * &pw(v, true, d);
        }
    }
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut keep = Mono::one();
        let mut t = Poly::one();
        for &(v, e) in m.0.iter() {
            if vals.contains_key(&v) {
                t = &t * &pw(v, false, e);
            } else {
                keep = keep.mul(&Mono::var(v, e));
            }
        }
        for (&v, &d) in &maxdeg {
            let e = m.exp_of(v);
            if d > e && !vals[&v].den().is_one() {
                t = &t * &pw(v, true, d - e);
            }
        }
        out = &out + &t.mul_mono(&keep, c);
    }
    (out, common)
}

pub(crate) fn subst_ratfunc(
    r: &RatFunc,
    vals: &HashMap<AtomId, RatFunc>,
) -> Result<RatFunc, ExprError> {
    if vals.is_empty() {
        return Ok(r.clone());
    }
    let (nn, nd) = poly_subst(r.num(), vals);
    if r.is_polynomial() {
        return RatFunc::new(nn, nd);
    }
    let (dn, dd) = poly_subst(r.den(), vals);
    RatFunc::new(&nn * &dd, &nd * &dn)
}

/// Image of each atom of `r` under `f`, omitting atoms mapped to themselves.
fn atom_images<F>(r: &RatFunc, f: &mut F) -> Result<HashMap<AtomId, RatFunc>, ExprError>
where
    F: FnMut(AtomId) -> Result<Option<RatFunc>, ExprError>,
{
    let mut vals = HashMap::new();
    for id in r.num().vars().into_iter().chain(r.den().vars()) {
        if vals.contains_key(&id) {
            continue;
        }
        if let Some(v) = f(id)? {
            vals.insert(id, v);
        }
    }
    Ok(vals)
}

/// Rebuilds an atom after mapping its arguments with `g`.
fn rebuild<G>(id: AtomId, g: &mut G) -> Result<Option<RatFunc>, ExprError>
where
    G: FnMut(&Expr) -> Result<Expr, ExprError>,
{
    let a = atom::lookup(id);
    let e = match &*a {
        Atom::Var(_) | Atom::Pi => return Ok(None),
        Atom::Func(f, u) => {
            let nu = g(u)?;
            if &nu == u {
                return Ok(None);
            }
            Expr::func(*f, nu)
        }
        Atom::Root(b, q) => {
            let nb = g(b)?;
            if &nb == b {
                return Ok(None);
            }
            Expr::root(&nb, *q)?
        }
        Atom::User(u, args) => {
            let na = args.iter().map(g).collect::<Result<Vec<_>, _>>()?;
            if &na == args {
                return Ok(None);
            }
            Expr::user(u.clone(), na)
        }
    };
    Ok(Some(e.ratfunc().clone()))
}

pub(crate) fn subs(e: &Expr, map: &HashMap<Symbol, Expr>) -> Result<Expr, ExprError> {
    if map.is_empty() || !e.free_vars().iter().any(|v| map.contains_key(v)) {
        return Ok(e.clone());
    }
    let mut f = |id: AtomId| -> Result<Option<RatFunc>, ExprError> {
        let a = atom::lookup(id);
        if let Atom::Var(s) = &*a {
            return Ok(map.get(s).map(|x| x.ratfunc().clone()));
        }
        rebuild(id, &mut |x: &Expr| subs(x, map))
    };
    let vals = atom_images(e.ratfunc(), &mut f)?;
    Ok(subst_ratfunc(e.ratfunc(), &vals)?.into())
}

pub(crate) fn conj(e: &Expr) -> Expr {
    let r = e.ratfunc();
    let c = |p: &Poly| p.map_coeffs(Coeff::conj);
    let base = RatFunc::new(c(r.num()), c(r.den())).expect("nonzero denominator");
    let mut f = |id: AtomId| rebuild(id, &mut |x: &Expr| Ok(conj(x)));
    let vals = atom_images(&base, &mut f).expect("conjugation is total");
    subst_ratfunc(&base, &vals)
        .expect("conjugation is total")
        .into()
}

pub(crate) fn trig_reduce(e: &Expr) -> Expr {
    let r = e.ratfunc();
    let mut f = |id: AtomId| rebuild(id, &mut |x: &Expr| Ok(trig_reduce(x)));
    let inner = atom_images(r, &mut f).expect("argument rewriting is total");
    let base = subst_ratfunc(r, &inner).expect("argument rewriting keeps denominators");
    let mut targets = Vec::new();
    for id in base.num().vars().into_iter().chain(base.den().vars()) {
        if let Atom::Func(Func::Cos | Func::Cosh, _) = &*atom::lookup(id) {
            if base.num().degree_in(id).max(base.den().degree_in(id)) >= 2 && !targets.contains(&id)
            {
                targets.push(id);
            }
        }
    }
    if targets.is_empty() {
        return base.into();
    }
    let reduce = |p: &Poly| -> Poly {
        let mut out = p.clone();
        for &id in &targets {
            let (f, u) = match &*atom::lookup(id) {
                Atom::Func(f, u) => (*f, u.clone()),
                _ => unreachable!(),
            };
            let s2 = match f {
                Func::Cos => u.sin(),
                _ => u.sinh(),
            }
            .ratfunc()
            .num()
            .pow(2);
            // cos^2 = 1 - sin^2, cosh^2 = 1 + sinh^2
            let sq = if f == Func::Cos {
                &Poly::one() - &s2
            } else {
                &Poly::one() + &s2
            };
            let mut acc = Poly::zero();
            for (k, ck) in out.to_univariate(id).iter().enumerate() {
                if ck.is_zero() {
                    continue;
                }
                let k = k as u32;
                let t = &sq.pow(k / 2) * &Poly::atom(id).pow(k % 2);
                acc = &acc + &(ck * &t);
            }
            out = acc;
        }
        out
    };
    RatFunc::new(reduce(base.num()), reduce(base.den()))
        .expect("identity rewrite")
        .into()
}

#[cfg(test)]
mod tests {
    use crate::parse;

    #[test]
    fn substitution_of_rational_values() {
        let e = parse("x^2 + 1/y").unwrap();
        let r = e.subs_var("x", &parse("1/y").unwrap()).unwrap();
        assert_eq!(r, parse("(1 + y)/y^2").unwrap());
    }

    #[test]
    fn substitution_inside_kernels() {
        let e = parse("sin(x) + A(x*y)").unwrap();
        let r = e.subs_var("x", &parse("2*t").unwrap()).unwrap();
        assert_eq!(r, parse("sin(2*t) + A(2*t*y)").unwrap());
    }

    #[test]
    fn pythagoras_after_rewrite() {
        let e = parse("sin(x)^2 + cos(x)^2 - 1").unwrap();
        assert!(!e.is_zero());
        assert!(e.trig_reduce().is_zero());
        let h = parse("cosh(2*x)^2 - sinh(2*x)^2").unwrap();
        assert!(h.trig_reduce().is_one());
    }

    #[test]
    fn conjugate_of_gaussian_constant() {
        let e = parse("(1 + 2*I)*x").unwrap();
        assert_eq!(e.conj(), parse("(1 - 2*I)*x").unwrap());
    }
}
