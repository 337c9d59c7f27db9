//! Chern character of a U(1) bundle over 2d Minkowski space with the
//! connection form i·A(t) dx.

use chernweil::bundle::{Field, VectorBundle};
use chernweil::charclass::{CharClass, Predefined};
use chernweil::connection::BundleConnection;
use chernweil::forms::DiffForm;
use chernweil::geometry::{Manifold, Structure};
use symexpr::{parse, Expr};

fn main() -> Result<(), chernweil::Error> {
    let mut m = Manifold::new("M", 2).with_structure(Structure::Lorentzian);
    m.add_chart("X", "M", &["t", "x"], vec![])?;
    let m = m.freeze();

    let mut e = VectorBundle::new("E", 1, Field::Complex, &m);
    e.add_frame("e", "M", "X")?;
    let cof = e.coordinate_coframe("e")?;

    let mut nab = BundleConnection::new("nabla", &e);
    let a = DiffForm::one_form(&cof, vec![Expr::zero(), parse("I*A(t)")?]);
    nab.set_forms("e", vec![vec![a]])?;
    println!(
        "curvature: {}",
        nab.curvature(&e, "e")?.entries[0][0].display()
    );

    let ch = CharClass::predefined(Predefined::ChernChar, &e)?;
    let form = ch.get_form(&e, &nab)?;
    println!("ch(E, nabla) = {}", form.first().display());
    println!("closed: {}", form.d()?.iter().all(|(_, f)| f.is_zero()));
    Ok(())
}
