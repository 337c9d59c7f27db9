//! First Chern form of the tautological line bundle over an affine chart of
//! CP^1, computed in complex coordinates and integrated in real ones.

use chernweil::bundle::{Field, VectorBundle};
use chernweil::charclass::{CharClass, Predefined};
use chernweil::connection::BundleConnection;
use chernweil::forms::{Coframe, DiffForm};
use chernweil::geometry::Manifold;
use chernweil::quadrature::{integrate_top_form, IntegrationTask};
use symexpr::{parse, Expr};

fn main() -> Result<(), chernweil::Error> {
    let mut m = Manifold::new("M", 2);
    m.add_chart("cart", "M", &["x", "y"], vec![])?;
    m.add_chart("comp", "M", &["z", "zbar"], vec![])?;
    m.add_transition(
        "cart",
        "comp",
        "M",
        vec![parse("x + I*y")?, parse("x - I*y")?],
        vec![parse("(z + zbar)/2")?, parse("(I*zbar - I*z)/2")?],
    )?;
    let m = m.freeze();

    let mut l = VectorBundle::new("L", 1, Field::Complex, &m);
    l.add_frame("e", "M", "comp")?;
    let cof = l.coordinate_coframe("e")?;
    // Chern connection of h = 1 + z zbar: omega = d'h / h
    let mut nab = BundleConnection::new("nabla", &l);
    nab.set_forms(
        "e",
        vec![vec![DiffForm::one_form(
            &cof,
            vec![parse("zbar/(1 + z*zbar)")?, Expr::zero()],
        )]],
    )?;

    let c = CharClass::predefined(Predefined::Chern, &l)?.get_form(&l, &nab)?;
    println!("c(L) = {}", c.first().display());

    let cart = m.chart("cart")?;
    let real = c.first().change_chart(&m, &Coframe::coordinate(cart))?;
    println!("in real coordinates: {}", real.part(2).display());
    let r = integrate_top_form(&IntegrationTask::new(real.part(2), cart))?;
    println!("integral = {}", r);
    Ok(())
}
