//! Taylor coefficients of the predefined base functions, and the series
//! actually applied to the scaled curvature of a real rank-8 bundle.

use chernweil::charclass::Predefined;
use chernweil::series::{taylor, transform_series, PowerSeries};

fn main() -> Result<(), chernweil::Error> {
    for p in Predefined::ALL {
        let g = p.function();
        let s = taylor(&g, "x", 4)?;
        println!("{:<10} g = {:<32} {}", p.name(), g.to_string(), s);
        let (c, vanished) = transform_series(&s, p.class_type(), p.field(), 8)?;
        let c: Vec<String> = c.iter().map(|e| e.to_string()).collect();
        println!(
            "{:<10} applied: [{}]{}",
            "",
            c.join(", "),
            if vanished { " (vanishes)" } else { "" }
        );
    }

    // series arithmetic by hand: exp(x) * exp(-x) = 1
    let e = taylor(&symexpr::parse("exp(x)")?, "x", 6)?;
    let f = e.compose(&PowerSeries::x(6).neg())?;
    println!("exp(x)*exp(-x) = {}", e.mul(&f));
    println!(
        "1/(1-x) = {}",
        PowerSeries::from_rationals(&[(1, 1), (-1, 1)])
            .truncate(6)
            .reciprocal()?
    );
    Ok(())
}
