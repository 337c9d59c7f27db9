//! Wedge products, exterior derivatives and pullbacks of forms on R^3.

use chernweil::forms::{Coframe, DiffForm, MixedForm};
use chernweil::geometry::Manifold;
use symexpr::parse;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut m = Manifold::new("R3", 3);
    m.add_chart("X", "R3", &["x", "y", "z"], vec![])?;
    m.add_chart("P", "R3", &["u", "v", "w"], vec![])?;
    m.add_transition(
        "P",
        "X",
        "R3",
        vec![parse("u")?, parse("v + u^2")?, parse("w*exp(u)")?],
        vec![parse("x")?, parse("y - x^2")?, parse("z*exp(-x)")?],
    )?;
    let m = m.freeze();
    let cof = Coframe::coordinate(m.chart("X")?);

    let a = DiffForm::one_form(&cof, vec![parse("y*z")?, parse("x^2")?, parse("sin(y)")?]);
    let b = DiffForm::from_components(
        &cof,
        2,
        vec![(vec![0, 2], parse("exp(x)")?), (vec![1, 2], parse("y")?)],
    )?;
    println!("a = {}", a.display());
    println!("b = {}", b.display());
    println!("a∧b = {}", a.wedge(&b)?.display());
    println!("da = {}", a.d()?.display());
    println!("d(da) = {}", a.d()?.d()?.display());

    let p = Coframe::coordinate(m.chart("P")?);
    let vol = DiffForm::from_components(&cof, 3, vec![(vec![0, 1, 2], parse("1")?)])?;
    println!("dx∧dy∧dz = {}", vol.change_chart(&m, &p)?.display());
    println!("a = {}", a.change_chart(&m, &p)?.display());

    let mixed = MixedForm::from_parts(
        &cof,
        vec![DiffForm::scalar(&cof, parse("1")?), a.clone(), b.clone()],
    )?;
    println!("(1 + a + b)^2 = {}", mixed.mul(&mixed)?.display());
    println!("latex: {}", a.to_latex());
    Ok(())
}
