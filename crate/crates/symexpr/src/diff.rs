//! Differentiation of canonical rational functions.

use std::collections::HashMap;

use once_cell::sync::Lazy;
use parking_lot::RwLock;

use crate::atom::{self, Atom, AtomId};
use crate::coeff::Coeff;
use crate::expr::{Expr, Func};
use crate::gcd::gcd;
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

static ATOM_DERIVS: Lazy<RwLock<HashMap<(AtomId, AtomId), RatFunc>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// `d(atom)/d(var)`.
fn atom_deriv(a: AtomId, v: AtomId) -> RatFunc {
    if a == v {
        return RatFunc::one();
    }
    if let Some(r) = ATOM_DERIVS.read().get(&(a, v)) {
        return r.clone();
    }
    let r = compute_atom_deriv(a, v);
    ATOM_DERIVS.write().insert((a, v), r.clone());
    r
}

fn compute_atom_deriv(a: AtomId, v: AtomId) -> RatFunc {
    let atom = atom::lookup(a);
    match &*atom {
        Atom::Var(_) | Atom::Pi => RatFunc::zero(),
        Atom::Func(f, u) => {
            let du = diff(u.ratfunc(), v);
            if du.is_zero() {
                return RatFunc::zero();
            }
            let this = RatFunc::from_poly(Poly::atom(a));
            let one = RatFunc::one();
            let outer = match f {
                Func::Sin => u.cos().ratfunc().clone(),
                Func::Cos => -u.sin().ratfunc(),
                Func::Tan => &one + &(&this * &this),
                Func::Sinh => u.cosh().ratfunc().clone(),
                Func::Cosh => u.sinh().ratfunc().clone(),
                Func::Tanh => &one - &(&this * &this),
                Func::Exp => this,
                Func::Log => u
                    .ratfunc()
                    .inv()
                    .expect("log of zero is never an atom argument here"),
                Func::Sqrt => unreachable!("square roots are root atoms"),
            };
            &outer * &du
        }
        Atom::Root(b, q) => {
            let db = diff(b.ratfunc(), v);
            if db.is_zero() {
                return RatFunc::zero();
            }
            let this = RatFunc::from_poly(Poly::atom(a));
            let k = Coeff::from_ratio(1, *q as i64);
            let over_b = this
                .checked_div(b.ratfunc())
                .expect("root of zero is folded");
            &over_b.scale(&k) * &db
        }
        Atom::User(u, args) => {
            let mut acc = RatFunc::zero();
            for (k, arg) in args.iter().enumerate() {
                let d = diff(arg.ratfunc(), v);
                if d.is_zero() {
                    continue;
                }
                let f = Expr::user(u.differentiated(k), args.clone());
                acc = &acc + &(f.ratfunc() * &d);
            }
            acc
        }
    }
}

/// Total derivative of a polynomial as a rational function.
fn diff_poly(p: &Poly, v: AtomId) -> RatFunc {
    let mut acc = RatFunc::zero();
    for a in p.vars() {
        let da = atom_deriv(a, v);
        if da.is_zero() {
            continue;
        }
        let pa = RatFunc::from_poly(p.partial(a));
        acc = &acc + &(&pa * &da);
    }
    acc
}

pub(crate) fn diff(r: &RatFunc, v: AtomId) -> RatFunc {
    let dn = diff_poly(r.num(), v);
    if r.is_polynomial() {
        return dn;
    }
    let dd = diff_poly(r.den(), v);
    if dd.is_zero() {
        return dn
            .checked_div(&RatFunc::from_poly(r.den().clone()))
            .expect("nonzero denominator");
    }
    let (n, q) = (r.num(), r.den());
    if dn.is_polynomial() && dd.is_polynomial() {
        // (n' q - n q') / q^2 with the repeated part of q cancelled up front
        let g = gcd(q, dd.num());
        let qg = q.exact_div(&g).expect("gcd divides");
        let dqg = dd.num().exact_div(&g).expect("gcd divides");
        let num = &(dn.num() * &qg) - &(n * &dqg);
        let den = q * &qg;
        return RatFunc::new(num, den).expect("nonzero denominator");
    }
    let qr = RatFunc::from_poly(q.clone());
    let nr = RatFunc::from_poly(n.clone());
    let top = &(&dn * &qr) - &(&nr * &dd);
    top.checked_div(&(&qr * &qr)).expect("nonzero denominator")
}

#[cfg(test)]
mod tests {
    use crate::parse;

    fn p(s: &str) -> crate::Expr {
        parse(s).unwrap()
    }

    #[test]
    fn formal_derivative_of_user_function() {
        assert_eq!(p("A(t)").diff("t"), p("A'(t)"));
        assert_eq!(p("A(t^2)").diff("t"), p("2*t*A'(t^2)"));
    }

    #[test]
    fn tautological_derivative() {
        assert_eq!(p("zbar/(1+z*zbar)").diff("zbar"), p("1/(1+z*zbar)^2"));
    }

    #[test]
    fn quotient_rule() {
        assert_eq!(p("4/(1+x^2+y^2)^2").diff("x"), p("-16*x/(1+x^2+y^2)^3"));
    }

    #[test]
    fn chain_rule_through_kernels() {
        assert_eq!(p("sin(x^2)").diff("x"), p("2*x*cos(x^2)"));
        assert_eq!(p("sqrt(x)").diff("x"), p("1/(2*sqrt(x))"));
        assert_eq!(p("log(1+x)").diff("x"), p("1/(1+x)"));
        assert_eq!(p("tanh(x)").diff("x"), p("1-tanh(x)^2"));
    }
}
