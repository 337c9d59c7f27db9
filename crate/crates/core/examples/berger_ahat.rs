//! Â-form of the tangent bundle of ℝ×S³ with the Lorentzian metric
//! `-dt² + a(t)²σ₁² + σ₂² + σ₃²`, the spheres carrying Berger metrics.

use std::time::Instant;

use chernweil::bundle::VectorBundle;
use chernweil::charclass::{CharClass, Predefined};
use chernweil::connection::{levi_civita, Metric, Signature};
use chernweil::geometry::{Manifold, Structure};
use symexpr::{equal_sym_with, parse, EqualOptions, Expr, FnTable};

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn main() -> Result<(), chernweil::Error> {
    let start = Instant::now();
    let mut m = Manifold::new("M", 4)
        .with_structure(Structure::Lorentzian)
        .with_start_index(0);
    m.open_subset("U", &["M"])?;
    m.open_subset("V", &["M"])?;
    m.declare_union("M", &["U", "V"])?;
    m.declare_intersection("W", "U", "V")?;
    m.add_chart("N", "U", &["t", "x", "y", "z"], vec![])?;
    m.add_chart("S", "V", &["tp", "xp", "yp", "zp"], vec![])?;
    let r2 = "(x^2+y^2+z^2)";
    let r2p = "(xp^2+yp^2+zp^2)";
    m.add_transition(
        "N",
        "S",
        "W",
        vec![
            p("t"),
            p(&format!("x/{r2}")),
            p(&format!("y/{r2}")),
            p(&format!("z/{r2}")),
        ],
        vec![
            p("tp"),
            p(&format!("xp/{r2p}")),
            p(&format!("yp/{r2p}")),
            p(&format!("zp/{r2p}")),
        ],
    )?;
    let m = m.freeze();
    let mut tm = VectorBundle::tangent("TM", &m)?;

    // left-invariant frame on S³ in stereographic coordinates, plus ∂_t
    let e = [
        ["1", "0", "0", "0"],
        ["0", "(x^2-y^2-z^2+1)/2", "x*y+z", "x*z-y"],
        ["0", "x*y-z", "(1-x^2+y^2-z^2)/2", "x+y*z"],
        ["0", "x*z+y", "y*z-x", "(1-x^2-y^2+z^2)/2"],
    ];
    let vectors: Vec<Vec<Expr>> = (0..4)
        .map(|j| (0..4).map(|i| p(e[i][j])).collect())
        .collect();
    tm.add_vector_frame("E", "N", vectors)?;
    let eps = tm.dual_coframe("E", "e")?;

    let d = |s: &str| p(s);
    let g = vec![
        vec![d("-1"), d("0"), d("0"), d("0")],
        vec![d("0"), d("a(t)^2"), d("0"), d("0")],
        vec![d("0"), d("0"), d("1"), d("0")],
        vec![d("0"), d("0"), d("0"), d("1")],
    ];
    let g = Metric::new("g", Signature::Lorentzian, &eps, g)?;
    let nab = levi_civita(&g, &tm, "nabla")?;
    println!("connection: {:.1?}", start.elapsed());

    let ahat = CharClass::predefined(Predefined::AHat, &tm)?;
    println!("base function: {}", ahat.function());
    let form = ahat.get_form(&tm, &nab)?;
    println!("form: {:.1?}", start.elapsed());
    let top = form.on("N").unwrap().part(4).change_coframe(&eps)?;
    let got = top.top_coefficient();
    println!("A-hat degree 4 in the dual frame: {}", got);

    let expected = p("(4*(a(t)^3 - a(t))*a'(t) - a'(t)*a''(t))/(24*pi^2)");
    let fns = FnTable::new()
        .unary("a", 0, |t| 2.0 + t.sin())
        .unary("a", 1, |t| t.cos())
        .unary("a", 2, |t| -t.sin());
    let opts = EqualOptions {
        trials: 20,
        tol: 1e-8,
        fns,
        ..Default::default()
    };
    println!(
        "matches the closed form: {:?}",
        equal_sym_with(&got, &expected, &opts)
    );
    println!("total: {:.1?}", start.elapsed());
    Ok(())
}
