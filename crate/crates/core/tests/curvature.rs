//! Curvature under frame changes, and frame independence of the
//! characteristic forms built from it.

mod common;

use chernweil::bundle::{Field, VectorBundle};
use chernweil::charclass::{CharClass, Predefined};
use chernweil::connection::BundleConnection;
use chernweil::forms::DiffForm;
use chernweil::geometry::Manifold;
use chernweil::matrix::{inverse, Matrix};
use common::{p, rng};
use rand::Rng;
use symexpr::Expr;

fn random_poly(r: &mut impl Rng) -> Expr {
    let mut s = String::from("0");
    for _ in 0..3 {
        s.push_str(&format!(
            " + ({})*x^{}*y^{}",
            r.gen_range(-3..=3),
            r.gen_range(0..3),
            r.gen_range(0..3)
        ));
    }
    p(&s)
}

fn setup(field: Field, g: Matrix) -> VectorBundle {
    let mut m = Manifold::new("R2", 2);
    m.add_chart("X", "R2", &["x", "y"], vec![]).unwrap();
    let m = m.freeze();
    let mut b = VectorBundle::new("E", 2, field, &m);
    b.add_frame("e", "R2", "X").unwrap();
    b.add_frame("f", "R2", "X").unwrap();
    b.set_frame_change("e", "f", "R2", "X", g).unwrap();
    b
}

fn gauge() -> Matrix {
    vec![vec![p("1"), p("x")], vec![p("y"), p("1 + x*y")]]
}

fn random_connection(b: &VectorBundle, seed: u64) -> BundleConnection {
    let mut r = rng(seed);
    let cof = b.coordinate_coframe("e").unwrap();
    let mut nab = BundleConnection::new("nabla", b);
    let w = (0..2)
        .map(|_| {
            (0..2)
                .map(|_| DiffForm::one_form(&cof, vec![random_poly(&mut r), random_poly(&mut r)]))
                .collect()
        })
        .collect();
    nab.set_forms("e", w).unwrap();
    nab
}

/// Ω_f = g⁻¹ Ω_e g entrywise.
#[test]
fn curvature_conjugates() {
    let g = gauge();
    let ginv = inverse(&g).unwrap();
    let b = setup(Field::Complex, g.clone());
    for seed in 0..10 {
        let nab = random_connection(&b, seed);
        let oe = nab.curvature(&b, "e").unwrap().entries;
        let of = nab.curvature(&b, "f").unwrap().entries;
        let cof = oe[0][0].coframe().clone();
        for i in 0..2 {
            for j in 0..2 {
                let mut want = DiffForm::zero(&cof, 2);
                for k in 0..2 {
                    for l in 0..2 {
                        want = want
                            .add(&oe[k][l].scale(&ginv[i][k].mul_ref(&g[l][j])))
                            .unwrap();
                    }
                }
                assert_eq!(of[i][j], want, "seed {} entry {},{}", seed, i, j);
            }
        }
    }
}

#[test]
fn chern_forms_do_not_depend_on_the_frame() {
    let b = setup(Field::Complex, gauge());
    for kind in [Predefined::Chern, Predefined::ChernChar, Predefined::Todd] {
        let class = CharClass::predefined(kind, &b).unwrap();
        for seed in 0..4 {
            let nab = random_connection(&b, seed);
            let fe = class.evaluate(&nab.curvature(&b, "e").unwrap()).unwrap();
            let ff = class.evaluate(&nab.curvature(&b, "f").unwrap()).unwrap();
            assert_eq!(fe, ff, "{} seed {}", kind.name(), seed);
            assert!(fe.d().unwrap().is_zero());
        }
    }
}

#[test]
fn flat_connection_has_trivial_forms() {
    let b = setup(Field::Real, gauge());
    let mut nab = BundleConnection::new("flat", &b);
    nab.set_flat("e", &b.coordinate_coframe("e").unwrap());
    let of = nab.curvature(&b, "f").unwrap();
    assert!(of.entries.iter().flatten().all(|w| w.is_zero()));
    let pont = CharClass::predefined(Predefined::Pontryagin, &b)
        .unwrap()
        .evaluate(&of)
        .unwrap();
    assert!(pont.part(0).comp(&[]).is_one());
    assert!(pont.parts()[1..].iter().all(|w| w.is_zero()));
}
