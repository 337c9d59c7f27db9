//! Runs every scenario file in this directory and prints the results.
//!
//! `cargo run --example run_scenario [-- --long]`

use std::path::Path;

use chernweil::cli::{render, run, Format, Options};

fn main() {
    let long = std::env::args().any(|a| a == "--long");
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .expect("examples directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    for f in files {
        println!("== {}", f.file_name().unwrap().to_string_lossy());
        let opts = Options {
            scenario: f.clone(),
            output: Format::Text,
            long,
            ..Default::default()
        };
        match run(&opts) {
            Ok(rep) => print!("{}", render(&rep, opts.output)),
            Err(e) => println!("error (exit {}): {}", e.exit_code(), e),
        }
    }
}
