//! The scenario files under examples/, run through the library entry point
//! and through the binary.

mod common;

use std::process::Command;

use chernweil::cli::{render, run, CliError, Format, Options};
use common::{p, scn};
use symexpr::equal_sym;

fn opts(name: &str) -> Options {
    Options {
        scenario: scn(name),
        ..Default::default()
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chernweil"))
}

/// Text output lists `[expr]_k` per degree; compares the degree-`k`
/// coefficient of the first piece with `want` as expressions.
fn piece_coefficient(out: &str, k: usize) -> String {
    let line = out
        .lines()
        .find(|l| l.trim_start().starts_with("on "))
        .unwrap();
    let tag = format!("]_{}", k);
    let end = line.find(&tag).unwrap();
    let start = line[..end].rfind('[').unwrap();
    let body = &line[start + 1..end];
    body.split(" d").next().unwrap().trim().to_string()
}

#[test]
fn minkowski_text_matches_golden() {
    let out = render(&run(&opts("minkowski_ch")).unwrap(), Format::Text);
    assert_eq!(p(&piece_coefficient(&out, 0)), p("1"));
    assert!(equal_sym(
        &p(&piece_coefficient(&out, 2)),
        &p("A'(t)/(2*pi)"),
        20,
        1e-10
    )
    .is_true());
    assert!(out.contains("dt∧dx"));
}

#[test]
fn tautological_and_sphere_golden() {
    let out = render(&run(&opts("tautological")).unwrap(), Format::Text);
    assert_eq!(p(&piece_coefficient(&out, 2)), p("I/(2*pi*(1 + z*zbar)^2)"));
    assert!(out.contains("integral = 1.0000000"));
    let out = render(&run(&opts("s2_euler")).unwrap(), Format::Text);
    assert_eq!(
        p(&piece_coefficient(&out, 2)),
        p("2/(pi*(1 + x^2 + y^2)^2)")
    );
    assert!(out.contains("integral = 2.0000000"));
}

#[test]
fn mobius_values() {
    let rep = run(&opts("mobius")).unwrap();
    let at = |s: &str, f: &str| {
        rep.sections
            .iter()
            .find(|(w, fr, _)| w == s && fr == f)
            .unwrap()
            .2[0]
            .clone()
    };
    assert_eq!(at("sigma at p", "eU"), p("1"));
    assert_eq!(at("tau at p", "eU"), p("-1"));
    assert!(at("s at p", "eU").is_zero());
}

#[test]
fn long_scenarios_are_skipped_without_flag() {
    let rep = run(&opts("berger_ahat")).unwrap();
    assert!(rep.skipped.is_some());
}

#[test]
fn json_output_is_deterministic() {
    for name in ["minkowski_ch", "tautological", "s2_euler"] {
        let a = bin()
            .args([
                "--scenario",
                scn(name).to_str().unwrap(),
                "--output",
                "json",
            ])
            .output()
            .unwrap();
        let b = bin()
            .args([
                "--scenario",
                scn(name).to_str().unwrap(),
                "--output",
                "json",
            ])
            .output()
            .unwrap();
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{}", name);
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        assert!(v.get("forms").is_some());
    }
}

#[test]
fn malformed_expression_exits_with_two() {
    let text = std::fs::read_to_string(scn("minkowski_ch"))
        .unwrap()
        .replace("I*A(t)", "I*A(t");
    let path = std::env::temp_dir().join(format!("chernweil_bad_{}.scn", std::process::id()));
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["--scenario", path.to_str().unwrap()])
        .output()
        .unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 24") && err.contains("[connection.e]"),
        "{}",
        err
    );
}

#[test]
fn failed_expectation_names_the_line() {
    let text = std::fs::read_to_string(scn("minkowski_ch"))
        .unwrap()
        .replace("A'(t)/(2*pi)", "A'(t)/pi");
    let sc = chernweil::scenario::Scenario::parse(&text)
        .unwrap()
        .build()
        .unwrap();
    let err = chernweil::cli::run_model(&sc, &Options::default())
        .err()
        .unwrap();
    assert!(
        matches!(err, CliError::Expectation { line: 37, .. }),
        "{}",
        err
    );
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn integrate_flags_override_the_scenario() {
    let out = bin()
        .args([
            "--scenario",
            scn("s2_euler").to_str().unwrap(),
            "--integrate",
            "euler",
            "--chart",
            "N",
            "--bounds",
            "x=0..inf,y=0..inf",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let s = String::from_utf8_lossy(&out.stdout);
    assert!(s.contains("integral = 0.500000"), "{}", s);
    let out = bin()
        .args([
            "--scenario",
            scn("s2_euler").to_str().unwrap(),
            "--integrate",
            "nope",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn latex_uses_partial_notation() {
    let out = render(&run(&opts("minkowski_ch")).unwrap(), Format::Latex);
    assert!(
        out.contains("\\partial A") && out.contains("\\wedge"),
        "{}",
        out
    );
}
