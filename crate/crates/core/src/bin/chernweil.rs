use std::path::PathBuf;
use std::process::ExitCode;

use chernweil::cli::{render, run, Format, Options};
use chernweil::quadrature::AxisBounds;
use clap::Parser;

/// Characteristic forms of vector bundles from a scenario file.
#[derive(Parser)]
#[command(name = "chernweil", version)]
struct Args {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// text, json or latex.
    #[arg(long, default_value = "text")]
    output: Format,
    /// Integrate the named class over a chart.
    #[arg(long, value_name = "FORM")]
    integrate: Option<String>,
    #[arg(long)]
    chart: Option<String>,
    /// Comma separated `axis=lo..hi` or `axis=inf`.
    #[arg(long, value_delimiter = ',')]
    bounds: Vec<AxisBounds>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed for probabilistic equality checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run scenarios marked long.
    #[arg(long)]
    long: bool,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let opts = Options {
        scenario: a.scenario,
        output: a.output,
        integrate: a.integrate,
        chart: a.chart,
        bounds: a.bounds,
        tolerance: a.tolerance,
        seed: a.seed,
        long: a.long,
    };
    match run(&opts) {
        Ok(rep) => {
            print!("{}", render(&rep, opts.output));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
