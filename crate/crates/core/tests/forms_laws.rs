//! Exterior calculus identities on random polynomial forms over R^2 and R^3.

use std::sync::Arc;

use chernweil::forms::{Coframe, DiffForm, MixedForm};
use chernweil::geometry::Manifold;
use proptest::prelude::*;
use symexpr::{parse, Expr};

const COORDS: [&str; 3] = ["x", "y", "z"];

fn coframe(n: usize) -> Arc<Coframe> {
    let mut m = Manifold::new("R", n);
    m.add_chart("X", "R", &COORDS[..n], vec![]).unwrap();
    Coframe::coordinate(m.chart("X").unwrap())
}

type Poly = Vec<(i64, [u32; 3])>;

fn poly_expr(p: &Poly, n: usize) -> Expr {
    if p.is_empty() {
        return Expr::zero();
    }
    let terms: Vec<String> = p
        .iter()
        .map(|(c, e)| {
            let mut t = format!("({})", c);
            for (v, k) in COORDS[..n].iter().zip(e) {
                t.push_str(&format!("*{}^{}", v, k));
            }
            t
        })
        .collect();
    parse(&terms.join(" + ")).unwrap()
}

fn blades(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn form(cof: &Arc<Coframe>, k: usize, polys: &[Poly]) -> DiffForm {
    let n = cof.dim();
    let comps: Vec<_> = blades(n, k)
        .into_iter()
        .zip(polys)
        .map(|(b, p)| (b, poly_expr(p, n)))
        .collect();
    DiffForm::from_components(cof, k, comps).unwrap()
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-3i64..=3, [0u32..3, 0u32..3, 0u32..3]), 0..4)
}

fn polys() -> impl Strategy<Value = Vec<Poly>> {
    prop::collection::vec(poly(), 3)
}

fn sign(k: usize, l: usize) -> Expr {
    Expr::int(if (k * l).is_multiple_of(2) { 1 } else { -1 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn d_squared_is_zero(n in 2usize..=3, k in 0usize..=3, a in polys()) {
        prop_assume!(k <= n);
        let cof = coframe(n);
        let a = form(&cof, k, &a);
        prop_assert!(a.d().unwrap().d().unwrap().is_zero());
    }

    #[test]
    fn wedge_is_graded_commutative(n in 2usize..=3, k in 0usize..=3, l in 0usize..=3, a in polys(), b in polys()) {
        prop_assume!(k <= n && l <= n);
        let cof = coframe(n);
        let (a, b) = (form(&cof, k, &a), form(&cof, l, &b));
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().scale(&sign(k, l)));
    }

    #[test]
    fn d_is_a_graded_derivation(n in 2usize..=3, k in 0usize..=3, l in 0usize..=3, a in polys(), b in polys()) {
        prop_assume!(k <= n && l <= n);
        let cof = coframe(n);
        let (a, b) = (form(&cof, k, &a), form(&cof, l, &b));
        let lhs = a.wedge(&b).unwrap().d().unwrap();
        let rhs = a.d().unwrap().wedge(&b).unwrap().add(&a.wedge(&b.d().unwrap()).unwrap().scale(&sign(k, 1))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_associative(a in polys(), b in polys(), c in polys()) {
        let cof = coframe(3);
        let (a, b, c) = (form(&cof, 1, &a), form(&cof, 1, &b), form(&cof, 1, &c));
        prop_assert_eq!(a.wedge(&b).unwrap().wedge(&c).unwrap(), a.wedge(&b.wedge(&c).unwrap()).unwrap());
    }

    #[test]
    fn mixed_d_squared_is_zero(a in polys(), b in polys(), f in poly()) {
        let cof = coframe(3);
        let m = MixedForm::from_parts(&cof, vec![
            DiffForm::scalar(&cof, poly_expr(&f, 3)),
            form(&cof, 1, &a),
            form(&cof, 2, &b),
            DiffForm::zero(&cof, 3),
        ]).unwrap();
        prop_assert!(m.d().unwrap().d().unwrap().is_zero());
    }
}

#[test]
fn change_of_chart_respects_d() {
    let mut m = Manifold::new("R2", 2);
    m.add_chart("X", "R2", &["x", "y"], vec![]).unwrap();
    m.add_chart("Y", "R2", &["u", "v"], vec![]).unwrap();
    m.add_transition(
        "X",
        "Y",
        "R2",
        vec![parse("x + y^3").unwrap(), parse("y").unwrap()],
        vec![parse("u - v^3").unwrap(), parse("v").unwrap()],
    )
    .unwrap();
    let m = m.freeze();
    let (cx, cy) = (
        Coframe::coordinate(m.chart("X").unwrap()),
        Coframe::coordinate(m.chart("Y").unwrap()),
    );
    let a = DiffForm::one_form(&cx, vec![parse("x*y").unwrap(), parse("sin(x)").unwrap()]);
    let lhs = a.d().unwrap().change_chart(&m, &cy).unwrap();
    let rhs = a.change_chart(&m, &cy).unwrap().d().unwrap();
    assert_eq!(lhs, rhs);
}
