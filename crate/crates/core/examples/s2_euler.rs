//! Gauss–Bonnet on the round sphere: pull the Euclidean metric back along
//! inverse stereographic projection, take the Levi-Civita connection and
//! integrate the Euler form over the chart.

use chernweil::bundle::VectorBundle;
use chernweil::charclass::{CharClass, Predefined};
use chernweil::connection::{levi_civita, pullback_metric, Metric, Signature, SmoothMap};
use chernweil::forms::Coframe;
use chernweil::geometry::Manifold;
use chernweil::quadrature::{integrate_top_form, IntegrationTask};
use symexpr::{parse, Expr};

fn main() -> Result<(), chernweil::Error> {
    let mut s2 = Manifold::new("S2", 2);
    s2.add_chart("N", "S2", &["x", "y"], vec![])?;
    let s2 = s2.freeze();

    let mut r3 = Manifold::new("R3", 3);
    r3.add_chart("cart", "R3", &["X", "Y", "Z"], vec![])?;
    let r3 = r3.freeze();
    let euclid = Metric::new(
        "h",
        Signature::Riemannian,
        &Coframe::coordinate(r3.chart("cart")?),
        (0..3)
            .map(|i| (0..3).map(|j| Expr::int((i == j) as i64)).collect())
            .collect(),
    )?;
    let iota = SmoothMap::new("iota", &s2, &r3).with(
        "N",
        "cart",
        vec![
            parse("2*x/(1+x^2+y^2)")?,
            parse("2*y/(1+x^2+y^2)")?,
            parse("(x^2+y^2-1)/(1+x^2+y^2)")?,
        ],
    )?;
    let g = pullback_metric(&euclid, &iota, "N", "g")?;
    println!("g_11 = {}", g.g[0][0]);

    let ts2 = VectorBundle::tangent("TS2", &s2)?;
    let nab = levi_civita(&g, &ts2, "nabla")?;
    println!(
        "Omega[1,2] = {}",
        nab.curvature(&ts2, "N")?.entries[0][1].display()
    );

    let euler = CharClass::predefined(Predefined::Euler, &ts2)?.get_form(&ts2, &nab)?;
    let top = euler.first().part(2).clone();
    println!("e(TS2) = {}", top.display());

    let chart = s2.chart("N")?;
    let r = integrate_top_form(&IntegrationTask::new(&top, chart))?;
    println!("integral = {}  (Euler characteristic 2)", r);
    Ok(())
}
