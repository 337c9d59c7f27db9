//! Runs a scenario end to end and renders the results.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use symexpr::{equal_sym_with, EqualOptions, Equality, Expr};

use crate::charclass::{CharClass, CharacteristicForm};
use crate::forms::{Coframe, MixedForm};
use crate::quadrature::{integrate_top_form, AxisBounds, Integral, IntegrationTask};
use crate::scenario::{Model, Scenario, ScenarioError};
use crate::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Json,
    Latex,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "latex" => Ok(Format::Latex),
            _ => Err(format!("unknown output format `{}` (text, json, latex)", s)),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub scenario: PathBuf,
    pub output: Format,
    /// Overrides `[integrate] form`.
    pub integrate: Option<String>,
    pub chart: Option<String>,
    pub bounds: Vec<AxisBounds>,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub long: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("[{section}] {source}")]
    Compute { section: String, source: Box<Error> },
    #[error("[expect] line {line}: {key} does not match: {detail}")]
    Expectation {
        line: usize,
        key: String,
        detail: String,
    },
    #[error("--integrate: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Usage(_) => 2,
            CliError::Compute { .. } => 1,
            CliError::Expectation { .. } => 3,
        }
    }
}

fn at<E: Into<Error>>(section: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Compute {
        section: section.to_string(),
        source: Box::new(e.into()),
    }
}

/// One characteristic form in the requested presentation.
pub struct FormReport {
    pub name: String,
    pub class: String,
    pub function: Expr,
    /// Frame or chart label → form.
    pub pieces: Vec<(String, MixedForm)>,
    /// `Some(true)` when asked for and every piece is closed.
    pub closed: Option<bool>,
}

pub struct IntegralReport {
    pub form: String,
    pub chart: String,
    pub result: Integral,
    pub expected: Option<f64>,
}

pub type CurvatureEntry = (usize, usize, String, String);

#[derive(Default)]
pub struct Report {
    pub skipped: Option<String>,
    /// Frame → nonzero entries `(row, col, text, latex)`.
    pub curvature: Vec<(String, Vec<CurvatureEntry>)>,
    pub forms: Vec<FormReport>,
    pub sections: Vec<(String, String, Vec<Expr>)>,
    pub expectations: Vec<(String, String)>,
    pub integral: Option<IntegralReport>,
    pub start: usize,
}

pub fn run(opts: &Options) -> Result<Report, CliError> {
    let sc = Scenario::load(&opts.scenario)?;
    let model = sc.build()?;
    run_model(&model, opts)
}

pub fn run_model(model: &Model, opts: &Options) -> Result<Report, CliError> {
    let mut rep = Report {
        start: model.manifold.start_index(),
        ..Default::default()
    };
    if model.compute.long && !opts.long {
        rep.skipped = Some("long scenario; pass --long to run it".into());
        return Ok(rep);
    }
    let eq = EqualOptions {
        trials: 20,
        tol: 1e-8,
        seed: opts.seed,
        trig_rules: true,
        fns: model.fns.clone(),
    };

    if model.compute.curvature {
        let (b, conn) = match (&model.bundle, &model.connection) {
            (Some(b), Some(c)) => (b, c),
            _ => {
                return Err(CliError::Usage(
                    "curvature needs a bundle and a connection".into(),
                ))
            }
        };
        let frames: Vec<String> = conn.frames().map(String::from).collect();
        for f in frames {
            let c = conn.curvature(b, &f).map_err(at("connection"))?;
            let mut entries = Vec::new();
            for (i, row) in c.entries.iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    if !w.is_zero() {
                        entries.push((i + rep.start, j + rep.start, w.display(), w.to_latex()));
                    }
                }
            }
            rep.curvature.push((f, entries));
        }
    }

    let mut names = model.compute.forms.clone();
    for e in &model.expects {
        if !names.contains(&e.form) {
            names.push(e.form.clone());
        }
    }
    let integrate_name = opts
        .integrate
        .clone()
        .or_else(|| model.integrate.as_ref().map(|i| i.form.clone()));
    if let Some(n) = &integrate_name {
        if model.class(n).is_none() {
            return Err(CliError::Usage(format!("unknown class `{}`", n)));
        }
        if !names.contains(n) {
            names.push(n.clone());
        }
    }

    let mut computed: Vec<(String, Arc<CharacteristicForm>)> = Vec::new();
    for n in &names {
        let class = model.class(n).unwrap();
        let form = characteristic(model, class).map_err(|e| CliError::Compute {
            section: format!("class.{}", n),
            source: Box::new(e),
        })?;
        computed.push((n.clone(), form));
    }

    for (n, form) in &computed {
        if !model.compute.forms.contains(n) {
            continue;
        }
        let class = model.class(n).unwrap();
        let pieces = present(model, form).map_err(|e| CliError::Compute {
            section: "compute".into(),
            source: Box::new(e),
        })?;
        let closed = if model.compute.closed {
            let mut ok = true;
            for (_, p) in form.pieces() {
                ok &= p.d().map_err(at("compute"))?.is_zero();
            }
            Some(ok)
        } else {
            None
        };
        rep.forms.push(FormReport {
            name: n.clone(),
            class: class.name().to_string(),
            function: class.function().clone(),
            pieces,
            closed,
        });
    }

    for e in &model.expects {
        let form = &computed.iter().find(|(n, _)| *n == e.form).unwrap().1;
        let pieces = present(model, form).map_err(|err| CliError::Compute {
            section: "expect".into(),
            source: Box::new(err),
        })?;
        let (label, piece) = pieces.first().ok_or_else(|| CliError::Expectation {
            line: e.line,
            key: e.key.clone(),
            detail: "form has no pieces".into(),
        })?;
        if e.degree > piece.dim() {
            return Err(CliError::Expectation {
                line: e.line,
                key: e.key.clone(),
                detail: format!("degree exceeds {}", piece.dim()),
            });
        }
        let part = piece.part(e.degree);
        let got = match &e.indices {
            Some(ix) => {
                let ix: Vec<usize> = ix.iter().map(|i| i.wrapping_sub(rep.start)).collect();
                if ix.len() != e.degree || ix.iter().any(|&i| i >= piece.dim()) {
                    return Err(CliError::Expectation {
                        line: e.line,
                        key: e.key.clone(),
                        detail: "bad component index".into(),
                    });
                }
                part.comp(&ix)
            }
            None if e.degree == 0 => part.comp(&[]),
            None if e.degree == piece.dim() => part.top_coefficient(),
            None => {
                let mut nz = part.components();
                match (nz.next(), nz.next()) {
                    (None, _) => Expr::zero(),
                    (Some((_, c)), None) => c.clone(),
                    _ => {
                        return Err(CliError::Expectation {
                            line: e.line,
                            key: e.key.clone(),
                            detail: "several components; give indices".into(),
                        })
                    }
                }
            }
        };
        match equal_sym_with(&got, &e.expr, &eq) {
            Equality::NotEqual { witness, lhs, rhs } => {
                return Err(CliError::Expectation {
                    line: e.line,
                    key: e.key.clone(),
                    detail: format!(
                        "on {}: got {} ({} vs {} at {:?})",
                        label, got, lhs, rhs, witness
                    ),
                })
            }
            Equality::Undetermined => {
                return Err(CliError::Expectation {
                    line: e.line,
                    key: e.key.clone(),
                    detail: format!("undetermined, got {}", got),
                })
            }
            r => rep
                .expectations
                .push((e.key.clone(), format!("{:?}", r).to_lowercase())),
        }
    }

    if let Some(b) = &model.bundle {
        for p in model.compute.points.iter() {
            let point = model
                .points
                .iter()
                .find(|x| &x.name == p)
                .ok_or_else(|| CliError::Usage(format!("unknown point `{}`", p)))?;
            for s in &model.compute.sections {
                let sec = model
                    .sections
                    .iter()
                    .find(|x| &x.name == s)
                    .ok_or_else(|| CliError::Usage(format!("unknown section `{}`", s)))?;
                for f in &sec.comps {
                    if let Ok(v) = b.section_at(sec, point, &f.0) {
                        rep.sections
                            .push((format!("{} at {}", s, p), f.0.clone(), v.comps));
                    }
                }
            }
        }
        if model.compute.points.is_empty() {
            for s in &model.compute.sections {
                let sec = model
                    .sections
                    .iter()
                    .find(|x| &x.name == s)
                    .ok_or_else(|| CliError::Usage(format!("unknown section `{}`", s)))?;
                for (f, c) in &sec.comps {
                    rep.sections.push((s.clone(), f.clone(), c.clone()));
                }
            }
        }
    }

    if let Some(n) = integrate_name {
        let form = &computed.iter().find(|(m, _)| *m == n).unwrap().1;
        rep.integral = Some(integrate(model, opts, &n, form)?);
    }
    Ok(rep)
}

fn characteristic(model: &Model, class: &Arc<CharClass>) -> Result<Arc<CharacteristicForm>, Error> {
    let b = model
        .bundle
        .as_ref()
        .ok_or(crate::charclass::CharClassError::NoFrames)?;
    if !model.curvature.is_empty() {
        return Ok(Arc::new(class.from_curvature(b, &model.curvature)?));
    }
    let conn = model
        .connection
        .as_ref()
        .ok_or(crate::charclass::CharClassError::NoFrames)?;
    if model.compute.frames.is_empty() {
        Ok(class.get_form(b, conn)?)
    } else {
        Ok(class.get_form_on(b, conn, &model.compute.frames)?)
    }
}

/// Applies the `[compute] chart` and `coframe` requests.
fn present(model: &Model, form: &CharacteristicForm) -> Result<Vec<(String, MixedForm)>, Error> {
    let mut out = Vec::new();
    for (frame, piece) in form.pieces() {
        if !model.compute.frames.is_empty() && !model.compute.frames.iter().any(|f| f == frame) {
            continue;
        }
        let mut p = piece.clone();
        let mut label = frame.to_string();
        if let Some(c) = &model.compute.chart {
            if p.coframe().chart() != c {
                let target = Coframe::coordinate(model.manifold.chart(c)?);
                p = p.change_chart(&model.manifold, &target)?;
            }
            label = format!("{} in chart {}", frame, c);
        }
        if let Some(f) = &model.compute.coframe {
            let b = model.bundle.as_ref().unwrap();
            let target = b.dual_coframe(f, "e")?;
            if target.chart() == p.coframe().chart() {
                p = p.change_coframe(&target)?;
                label = format!("{} in coframe dual to {}", frame, f);
            }
        }
        out.push((label, p));
    }
    Ok(out)
}

fn integrate(
    model: &Model,
    opts: &Options,
    name: &str,
    form: &CharacteristicForm,
) -> Result<IntegralReport, CliError> {
    let decl = model.integrate.as_ref().filter(|i| i.form == name);
    let chart_name = opts
        .chart
        .clone()
        .or_else(|| decl.and_then(|s| s.chart.clone()))
        .or_else(|| Some(form.first().coframe().chart().to_string()))
        .ok_or_else(|| CliError::Usage("no chart to integrate over".into()))?;
    let chart = model.manifold.chart(&chart_name).map_err(at("integrate"))?;
    let target = Coframe::coordinate(chart);
    let piece = form
        .pieces()
        .find(|(_, p)| p.coframe().chart() == chart_name)
        .map(|(_, p)| p.clone())
        .unwrap_or_else(|| form.first().clone());
    let piece = if piece.coframe().chart() == chart_name && !piece.coframe().is_coordinate() {
        piece.change_coframe(&target).map_err(at("integrate"))?
    } else if piece.coframe().chart() != chart_name {
        piece
            .change_chart(&model.manifold, &target)
            .map_err(at("integrate"))?
    } else {
        piece
    };
    let top = piece.part(piece.dim()).clone();
    let mut bounds = if !opts.bounds.is_empty() {
        opts.bounds.clone()
    } else {
        decl.map(|s| s.bounds.clone()).unwrap_or_default()
    };
    for c in &chart.coords {
        if !bounds.iter().any(|b| &b.axis == c) {
            bounds.push(AxisBounds::whole_line(c));
        }
    }
    let mut task = IntegrationTask::new(&top, chart)
        .bounds(bounds)
        .functions(model.fns.clone());
    if let Some(t) = opts.tolerance {
        task = task.tolerance(t);
    }
    let result = integrate_top_form(&task).map_err(at("integrate"))?;
    Ok(IntegralReport {
        form: name.to_string(),
        chart: chart_name,
        result,
        expected: decl
            .filter(|_| opts.bounds.is_empty())
            .and_then(|s| s.expected),
    })
}

fn fixed(x: f64) -> Value {
    let s = format!("{:.12e}", x);
    json!(s.parse::<f64>().unwrap_or(x))
}

pub fn render(rep: &Report, fmt: Format) -> String {
    match fmt {
        Format::Text => render_text(rep),
        Format::Latex => render_latex(rep),
        Format::Json => {
            let v = to_json(rep);
            let mut s = serde_json::to_string_pretty(&v).expect("json");
            s.push('\n');
            s
        }
    }
}

fn render_text(rep: &Report) -> String {
    let mut s = String::new();
    if let Some(r) = &rep.skipped {
        let _ = writeln!(s, "skipped: {}", r);
        return s;
    }
    for (f, entries) in &rep.curvature {
        let _ = writeln!(s, "curvature in frame {}:", f);
        for (i, j, d, _) in entries {
            let _ = writeln!(s, "  Omega[{},{}] = {}", i, j, d);
        }
    }
    for f in &rep.forms {
        let _ = writeln!(s, "{} ({}, g = {}):", f.name, f.class, f.function);
        for (label, p) in &f.pieces {
            let _ = writeln!(s, "  on {}: {}", label, p.display());
        }
        if let Some(c) = f.closed {
            let _ = writeln!(s, "  closed: {}", c);
        }
    }
    for (what, frame, comps) in &rep.sections {
        let c: Vec<String> = comps.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(s, "{} in frame {}: ({})", what, frame, c.join(", "));
    }
    for (k, r) in &rep.expectations {
        let _ = writeln!(s, "expect {}: {}", k, r);
    }
    if let Some(i) = &rep.integral {
        let _ = writeln!(s, "integral of {} over chart {}:", i.form, i.chart);
        let v = i.result.value;
        if v.im.abs() > i.result.error.max(1e-12) {
            let _ = writeln!(
                s,
                "integral = {:.9} {:+.9}i ± {:.1e}",
                v.re, v.im, i.result.error
            );
        } else {
            let _ = writeln!(s, "integral = {:.9} ± {:.1e}", v.re, i.result.error);
        }
        if let Some(e) = i.expected {
            let _ = writeln!(s, "expected = {} (difference {:.1e})", e, (v.re - e).abs());
        }
    }
    s
}

fn render_latex(rep: &Report) -> String {
    let mut s = String::new();
    if let Some(r) = &rep.skipped {
        let _ = writeln!(s, "% skipped: {}", r);
        return s;
    }
    for (f, entries) in &rep.curvature {
        for (i, j, _, l) in entries {
            let _ = writeln!(
                s,
                "\\Omega^{{{}}}_{{{}}} = {} \\quad \\text{{(frame {})}}\\\\",
                i, j, l, f
            );
        }
    }
    for f in &rep.forms {
        for (label, p) in &f.pieces {
            let _ = writeln!(s, "% {} on {}", f.name, label);
            let _ = writeln!(s, "\\mathrm{{{}}} = {}\\\\", f.name, p.to_latex());
        }
    }
    if let Some(i) = &rep.integral {
        let _ = writeln!(
            s,
            "\\int \\mathrm{{{}}} = {:.9} \\pm {:.1e}",
            i.form, i.result.value.re, i.result.error
        );
    }
    s
}

fn to_json(rep: &Report) -> Value {
    let mut root = Map::new();
    if let Some(r) = &rep.skipped {
        root.insert("skipped".into(), json!(r));
        return Value::Object(root);
    }
    if !rep.curvature.is_empty() {
        let mut c = Map::new();
        for (f, entries) in &rep.curvature {
            let mut m = Map::new();
            for (i, j, d, _) in entries {
                m.insert(format!("{},{}", i, j), json!(d));
            }
            c.insert(f.clone(), Value::Object(m));
        }
        root.insert("curvature".into(), Value::Object(c));
    }
    let mut forms = Map::new();
    for f in &rep.forms {
        let mut pieces = Map::new();
        for (label, p) in &f.pieces {
            pieces.insert(label.clone(), p.to_json(rep.start));
        }
        let mut o = Map::new();
        o.insert("class".into(), json!(f.class));
        o.insert("function".into(), json!(f.function.to_string()));
        o.insert("pieces".into(), Value::Object(pieces));
        if let Some(c) = f.closed {
            o.insert("closed".into(), json!(c));
        }
        forms.insert(f.name.clone(), Value::Object(o));
    }
    if !forms.is_empty() {
        root.insert("forms".into(), Value::Object(forms));
    }
    if !rep.sections.is_empty() {
        let mut m = Map::new();
        for (what, frame, comps) in &rep.sections {
            let c: Vec<String> = comps.iter().map(|e| e.to_string()).collect();
            m.insert(format!("{} / {}", what, frame), json!(c));
        }
        root.insert("sections".into(), Value::Object(m));
    }
    if !rep.expectations.is_empty() {
        let m: Map<String, Value> = rep
            .expectations
            .iter()
            .map(|(k, r)| (k.clone(), json!(r)))
            .collect();
        root.insert("expect".into(), Value::Object(m));
    }
    if let Some(i) = &rep.integral {
        let mut o = Map::new();
        o.insert("form".into(), json!(i.form));
        o.insert("chart".into(), json!(i.chart));
        o.insert("re".into(), fixed(i.result.value.re));
        o.insert("im".into(), fixed(i.result.value.im));
        o.insert("error".into(), fixed(i.result.error));
        o.insert("nodes".into(), json!(i.result.nodes));
        if let Some(e) = i.expected {
            o.insert("expected".into(), json!(e));
        }
        root.insert("integral".into(), Value::Object(o));
    }
    Value::Object(root)
}
