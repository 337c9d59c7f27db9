//! Plain-text (re-parsable) and LaTeX rendering.
//!
//! Output order only depends on atom sort keys, never on interning order, so
//! the same expression prints identically in every run.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::atom::{self, Atom, AtomId};
use crate::coeff::Coeff;
use crate::expr::{Expr, UserFn};
use crate::gcd::{gcd, make_monic};
use crate::poly::{Mono, Poly};
use crate::ratfunc::RatFunc;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Style {
    Plain,
    Latex,
}

/// `A`, `A'`, `A''` for unary symbols, `f'[1,0]` for partials of several
/// arguments.
pub fn user_label(u: &UserFn) -> String {
    if u.total_order() == 0 {
        return u.name.to_string();
    }
    if u.arity() == 1 {
        return format!("{}{}", u.name, "'".repeat(u.derivs[0] as usize));
    }
    let orders: Vec<String> = u.derivs.iter().map(|d| d.to_string()).collect();
    format!("{}'[{}]", u.name, orders.join(","))
}

pub fn atom_plain(a: &Atom) -> String {
    atom_str(a, Style::Plain)
}

fn atom_str(a: &Atom, st: Style) -> String {
    match (a, st) {
        (Atom::Var(s), Style::Plain) => s.to_string(),
        (Atom::Var(s), Style::Latex) => latex_name(s),
        (Atom::Pi, Style::Plain) => "pi".into(),
        (Atom::Pi, Style::Latex) => "\\pi".into(),
        (Atom::Func(f, u), Style::Plain) => format!("{}({})", f.name(), render(u.ratfunc(), st)),
        (Atom::Func(f, u), Style::Latex) => {
            format!("\\{}\\left({}\\right)", f.name(), render(u.ratfunc(), st))
        }
        (Atom::Root(b, 2), Style::Plain) => format!("sqrt({})", render(b.ratfunc(), st)),
        (Atom::Root(b, q), Style::Plain) => format!("({})^(1/{})", render(b.ratfunc(), st), q),
        (Atom::Root(b, 2), Style::Latex) => format!("\\sqrt{{{}}}", render(b.ratfunc(), st)),
        (Atom::Root(b, q), Style::Latex) => format!("\\sqrt[{}]{{{}}}", q, render(b.ratfunc(), st)),
        (Atom::User(u, args), Style::Plain) => {
            let a: Vec<String> = args.iter().map(|x| render(x.ratfunc(), st)).collect();
            format!("{}({})", user_label(u), a.join(", "))
        }
        (Atom::User(u, args), Style::Latex) => user_latex(u, args),
    }
}

fn latex_name(s: &str) -> String {
    const GREEK: [&str; 24] = [
        "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
        "lambda", "mu", "nu", "xi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega",
        "Omega", "Gamma",
    ];
    let base_end = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (base, digits) = s.split_at(base_end);
    let mut out = if GREEK.contains(&base) {
        format!("\\{}", base)
    } else if let Some(b) = base.strip_suffix("bar").filter(|b| !b.is_empty()) {
        format!("\\bar{{{}}}", latex_name(b))
    } else if base.chars().count() > 1 {
        format!("\\mathrm{{{}}}", base.replace('_', "\\_"))
    } else {
        base.to_string()
    };
    if !digits.is_empty() {
        out = format!("{}_{{{}}}", out, digits);
    }
    out
}

fn user_latex(u: &UserFn, args: &[Expr]) -> String {
    let name = latex_name(&u.name);
    let a: Vec<String> = args
        .iter()
        .map(|x| render(x.ratfunc(), Style::Latex))
        .collect();
    let call = format!("{}\\left({}\\right)", name, a.join(", "));
    let n = u.total_order();
    if n == 0 {
        return call;
    }
    let vars: Vec<Option<String>> = args
        .iter()
        .map(|x| x.as_var().map(|s| latex_name(&s)))
        .collect();
    let distinct = {
        let mut v: Vec<_> = vars.iter().flatten().collect();
        v.sort();
        v.dedup();
        v.len() == args.len()
    };
    if vars.iter().all(Option::is_some) && distinct {
        let mut den = Vec::new();
        for (k, &d) in u.derivs.iter().enumerate() {
            let v = vars[k].as_ref().unwrap();
            match d {
                0 => {}
                1 => den.push(format!("\\partial {}", v)),
                _ => den.push(format!("\\partial {}^{{{}}}", v, d)),
            }
        }
        let top = if n == 1 {
            "\\partial".to_string()
        } else {
            format!("\\partial^{{{}}}", n)
        };
        return format!("\\frac{{{} {}}}{{{}}}", top, name, den.join(" "));
    }
    if u.arity() == 1 {
        return format!("{}^{{({})}}\\left({}\\right)", name, n, a.join(", "));
    }
    let orders: Vec<String> = u.derivs.iter().map(|d| d.to_string()).collect();
    format!(
        "{}_{{({})}}\\left({}\\right)",
        name,
        orders.join(","),
        a.join(", ")
    )
}

/// Content-based key of a monomial: factors sorted by atom key.
fn mono_key(m: &Mono) -> Vec<(Arc<str>, u32)> {
    let mut v: Vec<(Arc<str>, u32)> = m.0.iter().map(|&(id, e)| (atom::key(id), e)).collect();
    v.sort();
    v
}

fn cmp_keys(a: &[(Arc<str>, u32)], b: &[(Arc<str>, u32)]) -> Ordering {
    let da: u32 = a.iter().map(|x| x.1).sum();
    let db: u32 = b.iter().map(|x| x.1).sum();
    if da != db {
        return db.cmp(&da);
    }
    for (x, y) in a.iter().zip(b.iter()) {
        match x.0.cmp(&y.0) {
            Ordering::Equal => {}
            o => return o,
        }
        if x.1 != y.1 {
            return y.1.cmp(&x.1);
        }
    }
    b.len().cmp(&a.len())
}

/// Terms in print order.
fn sorted_terms(p: &Poly) -> Vec<(Vec<(Arc<str>, u32)>, Mono, Coeff)> {
    let mut v: Vec<_> = p
        .terms()
        .iter()
        .map(|(m, c)| (mono_key(m), m.clone(), c.clone()))
        .collect();
    v.sort_by(|a, b| cmp_keys(&a.0, &b.0));
    v
}

fn mono_factors(m: &Mono, st: Style) -> Vec<String> {
    let mut f: Vec<(Arc<str>, AtomId, u32)> =
        m.0.iter().map(|&(id, e)| (atom::key(id), id, e)).collect();
    f.sort();
    f.into_iter().map(|(_, id, e)| power(id, e, st)).collect()
}

fn power(id: AtomId, e: u32, st: Style) -> String {
    let a = atom::lookup(id);
    let s = atom_str(&a, st);
    if e == 1 {
        return s;
    }
    match (st, &*a) {
        (Style::Plain, Atom::Root(_, q)) if *q > 2 => format!("({})^{}", s, e),
        (Style::Plain, _) => format!("{}^{}", s, e),
        (Style::Latex, Atom::Func(..)) | (Style::Latex, Atom::User(..)) => {
            format!("\\left({}\\right)^{{{}}}", s, e)
        }
        (Style::Latex, _) => format!("{}^{{{}}}", s, e),
    }
}

fn rat_str(r: &BigRational, st: Style) -> String {
    if r.is_integer() || st == Style::Plain {
        return r.to_string();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{}\\frac{{{}}}{{{}}}", sign, r.numer().abs(), r.denom())
}

/// A single term; the sign, if negative, is the first character.
fn term_str(c: &Coeff, factors: &[String], st: Style) -> String {
    let sep = if st == Style::Plain { "*" } else { " " };
    let i = if st == Style::Plain { "I" } else { "i" };
    let body = factors.join(sep);
    let coeff = if c.im.is_zero() {
        let r = &c.re;
        if factors.is_empty() {
            rat_str(r, st)
        } else if r.is_one() {
            String::new()
        } else if (-r).is_one() {
            "-".into()
        } else {
            format!("{}{}", rat_str(r, st), sep)
        }
    } else if c.re.is_zero() {
        let r = &c.im;
        let mag = if r.abs().is_one() {
            i.to_string()
        } else {
            format!("{}{}{}", rat_str(&r.abs(), st), sep, i)
        };
        let sign = if r.is_negative() { "-" } else { "" };
        if factors.is_empty() {
            format!("{}{}", sign, mag)
        } else {
            format!("{}{}{}", sign, mag, sep)
        }
    } else {
        let (l, r) = if st == Style::Plain {
            ("(", ")")
        } else {
            ("\\left(", "\\right)")
        };
        let im_sign = if c.im.is_negative() { " - " } else { " + " };
        let im_abs = c.im.abs();
        let im = if im_abs.is_one() {
            i.to_string()
        } else {
            format!("{}{}{}", rat_str(&im_abs, st), sep, i)
        };
        let s = format!("{}{}{}{}{}", l, rat_str(&c.re, st), im_sign, im, r);
        if factors.is_empty() {
            s
        } else {
            format!("{}{}", s, sep)
        }
    };
    format!("{}{}", coeff, body)
}

fn poly_str(p: &Poly, st: Style) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (_, m, c)) in sorted_terms(p).iter().enumerate() {
        let t = term_str(c, &mono_factors(m, st), st);
        if k == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}

/// Squarefree-style splitting of a polynomial with no monomial content into
/// monic factors with multiplicities.
fn split_factors(p: &Poly, mult: u32, out: &mut Vec<(Poly, u32)>) {
    if p.is_constant() {
        return;
    }
    for x in p.vars() {
        let d = p.partial(x);
        if d.is_zero() {
            continue;
        }
        let g = gcd(p, &d);
        if !g.is_constant() {
            let q = p.exact_div(&g).expect("gcd divides");
            split_factors(&g, mult, out);
            split_factors(&q, mult, out);
            return;
        }
    }
    for x in p.vars() {
        let mut c = Poly::zero();
        for k in p.to_univariate(x) {
            if !k.is_zero() {
                c = gcd(&c, &k);
                if c.is_constant() {
                    break;
                }
            }
        }
        if !c.is_constant() {
            let q = p.exact_div(&c).expect("content divides");
            split_factors(&c, mult, out);
            split_factors(&q, mult, out);
            return;
        }
    }
    let m = make_monic(p);
    match out.iter_mut().find(|(f, _)| *f == m) {
        Some(e) => e.1 += mult,
        None => out.push((m, mult)),
    }
}

fn gauss_content(p: &Poly) -> (BigInt, BigInt) {
    // (lcm of denominators, gcd of numerators)
    let mut l = BigInt::one();
    let mut g = BigInt::zero();
    for (_, c) in p.terms() {
        for r in [&c.re, &c.im] {
            if !r.is_zero() {
                l = l.lcm(r.denom());
                g = g.gcd(r.numer());
            }
        }
    }
    (l, g)
}

/// Scales `p` to integer coefficients without common factor whose first
/// printed coefficient has a positive leading part. Returns the factor `s`
/// with `p * s` being the result.
fn integer_normalise(p: &Poly) -> Coeff {
    let (l, _) = gauss_content(p);
    let scaled = p.scale(&Coeff::from_rational(BigRational::from_integer(l.clone())));
    let (_, g) = gauss_content(&scaled);
    let mut s = BigRational::new(l, g);
    if let Some((_, _, c)) = sorted_terms(p).first() {
        if c.leading_sign_negative() {
            s = -s;
        }
    }
    Coeff::from_rational(s)
}

fn render(r: &RatFunc, st: Style) -> String {
    if r.is_polynomial() {
        return poly_str(r.num(), st);
    }
    let den = r.den();
    let mono = den.mono_content();
    let rest = den.div_mono(&mono);
    let mut factors = Vec::new();
    split_factors(&rest, 1, &mut factors);
    factors.sort_by(|a, b| {
        let ka = sorted_terms(&a.0)
            .into_iter()
            .map(|t| t.0)
            .collect::<Vec<_>>();
        let kb = sorted_terms(&b.0)
            .into_iter()
            .map(|t| t.0)
            .collect::<Vec<_>>();
        a.1.cmp(&b.1).then_with(|| {
            ka.iter()
                .zip(kb.iter())
                .map(|(x, y)| cmp_keys(x, y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    // den = kappa * mono * prod(f_i^k_i) with integer-normalised f_i
    let mut prod = Poly::monomial(mono.clone(), Coeff::one());
    let mut norm_factors = Vec::new();
    for (f, k) in &factors {
        let s = integer_normalise(f);
        let fi = f.scale(&s);
        prod = &prod * &fi.pow(*k);
        norm_factors.push((fi, *k));
    }
    let kappa = den
        .exact_div(&prod)
        .and_then(|q| q.as_constant())
        .expect("denominator splits into its factors");
    let n = r.num().scale(&kappa.inv());
    let (l, g) = gauss_content(&n);
    let common = BigInt::gcd(&g, &l);
    let num_scale = BigRational::new(l.clone(), common.clone());
    let n = n.scale(&Coeff::from_rational(num_scale));
    let lead = (&l / &common).abs();

    let num_s = poly_str(&n, st);
    let mut den_parts = Vec::new();
    if !lead.is_one() {
        den_parts.push(lead.to_string());
    }
    den_parts.extend(mono_factors(&mono, st));
    for (f, k) in &norm_factors {
        let body = poly_str(f, st);
        let wrapped = if f.len() > 1 {
            if st == Style::Plain {
                format!("({})", body)
            } else {
                format!("\\left({}\\right)", body)
            }
        } else {
            body
        };
        den_parts.push(match (k, st) {
            (1, _) => wrapped,
            (k, Style::Plain) => format!("{}^{}", wrapped, k),
            (k, Style::Latex) => format!("{}^{{{}}}", wrapped, k),
        });
    }
    match st {
        Style::Plain => {
            let num_w = if n.len() > 1 {
                format!("({})", num_s)
            } else {
                num_s
            };
            if den_parts.len() == 1 {
                format!("{}/{}", num_w, den_parts[0])
            } else {
                format!("{}/({})", num_w, den_parts.join("*"))
            }
        }
        Style::Latex => {
            let (neg, top) = match num_s.strip_prefix('-') {
                Some(t) if n.len() == 1 => ("-", t.to_string()),
                _ => ("", num_s),
            };
            format!("{}\\frac{{{}}}{{{}}}", neg, top, den_parts.join(" "))
        }
    }
}

pub fn to_plain(r: &RatFunc) -> String {
    render(r, Style::Plain)
}

pub fn to_latex(r: &RatFunc) -> String {
    render(r, Style::Latex)
}

#[cfg(test)]
mod tests {
    use crate::parse;

    fn show(s: &str) -> String {
        parse(s).unwrap().to_string()
    }

    #[test]
    fn factored_denominators() {
        assert_eq!(show("2/(pi*(1+x^2+y^2)^2)"), "2/(pi*(x^2 + y^2 + 1)^2)");
        assert_eq!(
            show("I/(2*(pi + pi*z^2*zbar^2 + 2*pi*z*zbar))"),
            "I/(2*pi*(z*zbar + 1)^2)"
        );
    }

    #[test]
    fn polynomial_terms() {
        assert_eq!(show("1 - x + x^2/2"), "1/2*x^2 - x + 1");
        assert_eq!(show("-I*A(t)"), "-I*A(t)");
        assert_eq!(show("A''(t)"), "A''(t)");
    }

    #[test]
    fn latex_derivatives() {
        let e = parse("A'(t)/(2*pi)").unwrap();
        assert_eq!(
            e.to_latex(),
            "\\frac{\\frac{\\partial A}{\\partial t}}{2 \\pi}"
        );
    }
}
