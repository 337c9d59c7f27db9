use std::collections::HashMap;

use proptest::prelude::*;
use symexpr::{parse, Compiled, Complex64, Expr, FnTable};

#[derive(Clone, Debug)]
enum Tree {
    Var(usize),
    Int(i64),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, i32),
    Call(&'static str, Box<Tree>),
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn tree(smooth_only: bool) -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(Tree::Var),
        (-3..4i64).prop_map(Tree::Int)
    ];
    let fns: Vec<&'static str> = if smooth_only {
        vec!["sin", "cos", "exp", "tanh", "A"]
    } else {
        vec!["sin", "cos", "exp", "log", "sqrt", "A"]
    };
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let fns = fns.clone();
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Add(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Sub(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Mul(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Div(a.into(), b.into())),
            (inner.clone(), -2..4i32).prop_map(|(a, e)| Tree::Pow(a.into(), e)),
            (proptest::sample::select(fns), inner).prop_map(|(f, a)| Tree::Call(f, a.into())),
        ]
    })
}

/// Builds through the constructors; `None` on division by zero.
fn build(t: &Tree) -> Option<Expr> {
    Some(match t {
        Tree::Var(k) => Expr::var(VARS[*k]),
        Tree::Int(n) => Expr::int(*n),
        Tree::Add(a, b) => build(a)? + build(b)?,
        Tree::Sub(a, b) => build(a)? - build(b)?,
        Tree::Mul(a, b) => build(a)? * build(b)?,
        Tree::Div(a, b) => build(a)?.checked_div(&build(b)?).ok()?,
        Tree::Pow(a, e) => build(a)?.powi(*e).ok()?,
        Tree::Call("A", a) => Expr::call("A", vec![build(a)?]),
        Tree::Call(f, a) => Expr::func(symexpr::Func::from_name(f).unwrap(), build(a)?),
    })
}

/// Fully parenthesised source text for the same tree.
fn text(t: &Tree) -> String {
    match t {
        Tree::Var(k) => VARS[*k].to_string(),
        Tree::Int(n) => format!("({})", n),
        Tree::Add(a, b) => format!("({} + {})", text(a), text(b)),
        Tree::Sub(a, b) => format!("({} - {})", text(a), text(b)),
        Tree::Mul(a, b) => format!("({} * {})", text(a), text(b)),
        Tree::Div(a, b) => format!("({} / {})", text(a), text(b)),
        Tree::Pow(a, e) => format!("({}^({}))", text(a), e),
        Tree::Call(f, a) => format!("{}({})", f, text(a)),
    }
}

fn fns() -> FnTable {
    FnTable::new()
        .unary("A", 0, |t| (t * 0.7).sin() + 2.0)
        .unary("A", 1, |t| (t * 0.7).cos() * 0.7)
        .unary("A", 2, |t| -(t * 0.7).sin() * 0.49)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, .. ProptestConfig::default() })]

    #[test]
    fn canonical_form_is_idempotent_and_printable(t in tree(false)) {
        if let Some(e) = build(&t) {
            let c = symexpr::canonicalize(&e);
            prop_assert_eq!(&symexpr::canonicalize(&c), &c);
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            prop_assert_eq!(&back, &e, "printed as {}", printed);
        }
    }

    #[test]
    fn parser_agrees_with_constructors(t in tree(false)) {
        if let Some(e) = build(&t) {
            prop_assert_eq!(parse(&text(&t)).unwrap(), e);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, .. ProptestConfig::default() })]

    #[test]
    fn derivative_matches_central_differences(
        t in tree(true),
        px in -1.5..1.5f64,
        py in -1.5..1.5f64,
        pz in -1.5..1.5f64,
    ) {
        let e = match build(&t) { Some(e) => e, None => return Ok(()) };
        let d = e.diff("x");
        let prog = Compiled::new(&[e.clone(), d], &VARS, &fns()).unwrap();
        let h = 1e-6;
        let at = |x: f64| prog.eval_tracking(&[Complex64::new(x, 0.0), Complex64::new(py, 0.0), Complex64::new(pz, 0.0)]);
        let (c, p, m) = match (at(px), at(px + h), at(px - h)) {
            (Ok(c), Ok(p), Ok(m)) => (c, p, m),
            _ => return Ok(()),
        };
        // stay away from poles, where differences are meaningless
        if c.1.min(p.1).min(m.1) < 1e-2 || c.0[0].norm() > 1e4 {
            return Ok(());
        }
        let fd = (p.0[0] - m.0[0]) / (2.0 * h);
        let exact = c.0[1];
        let scale = exact.norm().max(1e-3 * c.0[0].norm()).max(1e-6);
        prop_assert!((fd - exact).norm() <= 1e-5 * scale.max(1.0),
            "f = {}, fd = {}, exact = {}", e, fd, exact);
    }
}

#[test]
fn imaginary_unit_squared_plus_one_vanishes() {
    assert!(parse("I^2 + 1").unwrap().is_zero());
    assert!((Expr::i() * Expr::i() + Expr::one()).is_zero());
}

#[test]
fn expanded_and_factored_forms_compare_equal() {
    let a = parse("I/(2*(pi + pi*z^2*zbar^2 + 2*pi*z*zbar))").unwrap();
    let b = parse("I/(2*pi*(1+z*zbar)^2)").unwrap();
    assert_eq!(a, b);
    assert!((parse("x*y - y*x").unwrap()).is_zero());
    assert!((parse("(1+x)^2 - (x^2+2*x+1)").unwrap()).is_zero());
}

#[test]
fn ahat_base_function_parses() {
    let e = parse("sqrt(x)/(2*sinh(sqrt(x)/2))").unwrap();
    let mut b = HashMap::new();
    b.insert("x".to_string(), Complex64::new(0.25, 0.0));
    let v = symexpr::eval_numeric(&e, &b, &FnTable::new()).unwrap();
    let expect = 0.5 / (2.0 * (0.25f64).sinh());
    assert!((v.re - expect).abs() < 1e-14);
}
