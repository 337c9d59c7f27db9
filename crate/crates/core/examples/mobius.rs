//! Sections of the Moebius bundle over RP^1 and their values at a point.

use chernweil::bundle::{Field, Section, VectorBundle};
use chernweil::geometry::Manifold;
use symexpr::{parse, Expr};

fn main() -> Result<(), chernweil::Error> {
    let mut m = Manifold::new("RP1", 1);
    m.open_subset("U", &[])?;
    m.open_subset("V", &[])?;
    m.declare_union("RP1", &["U", "V"])?;
    m.declare_intersection("W", "U", "V")?;
    m.add_chart("cu", "U", &["u"], vec![])?;
    m.add_chart("cv", "V", &["v"], vec![])?;
    m.add_transition("cu", "cv", "W", vec![parse("1/u")?], vec![parse("1/v")?])?;
    let m = m.freeze();

    let mut e = VectorBundle::new("E", 1, Field::Real, &m);
    e.add_frame("eU", "U", "cu")?;
    e.add_frame("eV", "V", "cv")?;
    e.set_frame_change("eV", "eU", "W", "cu", vec![vec![parse("u")?]])?;
    println!("eV = ({}) eU", e.frame_change("eU", "eV")?.matrix[0][0]);

    let sigma = Section::new("sigma", "U").with("eU", vec![parse("(1-u)/(1+u^2)")?]);
    let sigma = e.continue_section(&sigma, "eV", "W")?;
    let tau = Section::new("tau", "V").with("eV", vec![parse("(3-v^2)/(1+v^4)")?]);
    let tau = e.continue_section(&tau, "eU", "W")?;
    let sum = sigma.add(&tau, "sigma+tau");
    for s in [&sigma, &tau, &sum] {
        for (frame, c) in &s.comps {
            println!("{} in {}: {}", s.name, frame, c[0]);
        }
    }

    let p = m.point("p", "cu", vec![Expr::int(-1)])?;
    for s in [&sigma, &tau, &sum] {
        println!("{} at p: {}", s.name, e.section_at(s, &p, "eU")?.comps[0]);
    }
    Ok(())
}
