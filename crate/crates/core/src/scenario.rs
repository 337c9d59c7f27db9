//! Line-oriented scenario files: `[kind]` or `[kind.name]` headers followed
//! by `key = value` lines, `#` starting a comment line. Expression values
//! use the symexpr grammar; lists are comma separated at the top level.
//!
//! ```text
//! [manifold]
//! name = M
//! dim = 2
//!
//! [chart.X]
//! coords = t, x
//!
//! [bundle]
//! rank = 1
//! field = complex
//!
//! [frame.e]
//! chart = X
//!
//! [connection.e]
//! 1,1 dx = I*A(t)
//!
//! [class.ch]
//! kind = ChernChar
//! ```

use std::path::Path;
use std::sync::Arc;

use symexpr::{parse, Compiled, Complex64, Expr, FnTable};
use thiserror::Error;

use crate::bundle::{Field, Section as BundleSection, VectorBundle};
use crate::charclass::{CharClass, Predefined};
use crate::connection::{
    levi_civita, pullback_metric, BundleConnection, CurvatureMatrix, Metric, Signature, SmoothMap,
};
use crate::forms::{Coframe, DiffForm};
use crate::geometry::{Manifold, Point, Restriction, Structure};
use crate::quadrature::AxisBounds;
use crate::series::ClassType;

/// A problem in the scenario itself, located by line.
#[derive(Debug, Error, PartialEq)]
#[error("line {line}: [{section}] {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub section: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawSection {
    pub kind: String,
    pub name: Option<String>,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl RawSection {
    fn title(&self) -> String {
        match &self.name {
            Some(n) => format!("{}.{}", self.kind, n),
            None => self.kind.clone(),
        }
    }

    fn err(&self, line: usize, message: impl ToString) -> ScenarioError {
        ScenarioError {
            line,
            section: self.title(),
            message: message.to_string(),
        }
    }

    fn here(&self, message: impl ToString) -> ScenarioError {
        self.err(self.line, message)
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn require(&self, key: &str) -> Result<&Entry, ScenarioError> {
        self.get(key)
            .ok_or_else(|| self.here(format!("missing key `{}`", key)))
    }

    fn name(&self) -> Result<&str, ScenarioError> {
        self.name
            .as_deref()
            .ok_or_else(|| self.here(format!("section needs a name: [{}.NAME]", self.kind)))
    }

    fn string(&self, key: &str, default: &str) -> String {
        self.get(key)
            .map(|e| e.value.clone())
            .unwrap_or_else(|| default.to_string())
    }

    fn boolean(&self, key: &str) -> Result<bool, ScenarioError> {
        match self.get(key) {
            None => Ok(false),
            Some(e) => match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                v => Err(self.err(e.line, format!("`{}` is not a boolean", v))),
            },
        }
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|e| split_top(&e.value))
            .unwrap_or_default()
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), ScenarioError> {
        match self
            .entries
            .iter()
            .find(|e| !allowed.contains(&e.key.as_str()))
        {
            Some(e) => Err(self.err(e.line, format!("unknown key `{}`", e.key))),
            None => Ok(()),
        }
    }
}

const KINDS: [&str; 17] = [
    "manifold",
    "subset",
    "chart",
    "transition",
    "functions",
    "bundle",
    "frame",
    "frame_change",
    "section",
    "point",
    "metric",
    "connection",
    "curvature",
    "class",
    "compute",
    "expect",
    "integrate",
];

const SINGLE: [&str; 7] = [
    "manifold",
    "functions",
    "bundle",
    "metric",
    "compute",
    "expect",
    "integrate",
];

/// The parsed, not yet validated, file.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub sections: Vec<RawSection>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError {
            line: 0,
            section: String::new(),
            message: format!("cannot read {}: {}", path.display(), e),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut sections: Vec<RawSection> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if let Some(h) = t.strip_prefix('[') {
                let h = h.strip_suffix(']').ok_or_else(|| ScenarioError {
                    line,
                    section: String::new(),
                    message: format!("unterminated section header `{}`", t),
                })?;
                let (kind, name) = match h.split_once('.') {
                    Some((k, n)) => (k.trim().to_string(), Some(n.trim().to_string())),
                    None => (h.trim().to_string(), None),
                };
                if !KINDS.contains(&kind.as_str()) {
                    return Err(ScenarioError {
                        line,
                        section: h.into(),
                        message: format!("unknown section kind `{}`", kind),
                    });
                }
                if SINGLE.contains(&kind.as_str())
                    && name.is_none()
                    && sections.iter().any(|s| s.kind == kind && s.name.is_none())
                {
                    return Err(ScenarioError {
                        line,
                        section: kind,
                        message: "section given twice".into(),
                    });
                }
                if name.is_some() && sections.iter().any(|s| s.kind == kind && s.name == name) {
                    return Err(ScenarioError {
                        line,
                        section: h.into(),
                        message: "section given twice".into(),
                    });
                }
                sections.push(RawSection {
                    kind,
                    name,
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let Some(sec) = sections.last_mut() else {
                return Err(ScenarioError {
                    line,
                    section: String::new(),
                    message: "entry outside of any section".into(),
                });
            };
            let (key, value) = t
                .split_once('=')
                .ok_or_else(|| sec.err(line, format!("expected `key = value`, got `{}`", t)))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(sec.err(line, "empty key"));
            }
            if sec.entries.iter().any(|e| e.key == key) {
                return Err(sec.err(line, format!("key `{}` given twice", key)));
            }
            sec.entries.push(Entry {
                key,
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Scenario { sections })
    }

    fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a RawSection> + 'a {
        self.sections.iter().filter(move |s| s.kind == kind)
    }

    fn single<'a>(&'a self, kind: &'a str) -> Option<&'a RawSection> {
        self.of_kind(kind).next()
    }

    /// Validates the declarations and builds every object they describe.
    pub fn build(&self) -> Result<Model, ScenarioError> {
        Builder { sc: self }.build()
    }
}

/// Splits at commas outside parentheses and brackets.
pub fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// What `[compute]` asks for.
#[derive(Clone, Debug, Default)]
pub struct Compute {
    pub forms: Vec<String>,
    pub frames: Vec<String>,
    pub chart: Option<String>,
    pub coframe: Option<String>,
    pub curvature: bool,
    pub closed: bool,
    pub sections: Vec<String>,
    pub points: Vec<String>,
    pub long: bool,
    pub line: usize,
}

/// An expected component `form:degree[i,j,..] = expr`.
#[derive(Clone, Debug)]
pub struct Expect {
    pub line: usize,
    pub key: String,
    pub form: String,
    pub degree: usize,
    /// Zero-based; empty means the single top component of the degree.
    pub indices: Option<Vec<usize>>,
    pub expr: Expr,
}

#[derive(Clone, Debug)]
pub struct Integrate {
    pub line: usize,
    pub form: String,
    pub chart: Option<String>,
    pub bounds: Vec<AxisBounds>,
    pub expected: Option<f64>,
}

/// Everything a scenario declares, built and validated.
pub struct Model {
    pub manifold: Arc<Manifold>,
    pub bundle: Option<VectorBundle>,
    pub fns: FnTable,
    pub sections: Vec<BundleSection>,
    pub points: Vec<Point>,
    pub metric: Option<Metric>,
    pub connection: Option<BundleConnection>,
    pub curvature: Vec<CurvatureMatrix>,
    pub classes: Vec<(String, Arc<CharClass>)>,
    pub compute: Compute,
    pub expects: Vec<Expect>,
    pub integrate: Option<Integrate>,
}

impl Model {
    pub fn class(&self, name: &str) -> Option<&Arc<CharClass>> {
        self.classes.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }
}

struct Builder<'a> {
    sc: &'a Scenario,
}

fn expr(sec: &RawSection, e: &Entry) -> Result<Expr, ScenarioError> {
    expr_at(sec, e.line, &e.value)
}

fn expr_at(sec: &RawSection, line: usize, s: &str) -> Result<Expr, ScenarioError> {
    parse(s).map_err(|err| sec.err(line, format!("expression `{}`: {}", s, err)))
}

fn exprs(sec: &RawSection, e: &Entry) -> Result<Vec<Expr>, ScenarioError> {
    split_top(&e.value)
        .iter()
        .map(|s| expr_at(sec, e.line, s))
        .collect()
}

fn index(
    sec: &RawSection,
    line: usize,
    s: &str,
    start: usize,
    n: usize,
) -> Result<usize, ScenarioError> {
    let v: usize = s
        .trim()
        .parse()
        .map_err(|_| sec.err(line, format!("`{}` is not an index", s)))?;
    if v < start || v >= start + n {
        return Err(sec.err(
            line,
            format!("index {} outside {}..{}", v, start, start + n - 1),
        ));
    }
    Ok(v - start)
}

impl Builder<'_> {
    fn build(&self) -> Result<Model, ScenarioError> {
        let msec = self.sc.single("manifold").ok_or_else(|| ScenarioError {
            line: 0,
            section: "manifold".into(),
            message: "missing [manifold] section".into(),
        })?;
        let manifold = self.manifold(msec)?;
        let fns = self.functions()?;
        let mut bundle = self.bundle(&manifold)?;
        if let Some(b) = bundle.as_mut() {
            self.frames(b)?;
            self.frame_changes(b)?;
        }
        let points = self.points(&manifold)?;
        let sections = match &bundle {
            Some(b) => self.sections(b)?,
            None => Vec::new(),
        };
        let metric = self.metric(&manifold, bundle.as_ref())?;
        let connection = self.connection(bundle.as_ref(), metric.as_ref())?;
        let curvature = self.curvature(bundle.as_ref())?;
        let classes = self.classes(bundle.as_ref())?;
        let compute = self.compute(&classes)?;
        let expects = self.expects(&classes)?;
        let integrate = self.integrate(&classes)?;
        Ok(Model {
            manifold,
            bundle,
            fns,
            sections,
            points,
            metric,
            connection,
            curvature,
            classes,
            compute,
            expects,
            integrate,
        })
    }

    fn manifold(&self, s: &RawSection) -> Result<Arc<Manifold>, ScenarioError> {
        s.check_keys(&["name", "dim", "structure", "start_index", "union"])?;
        let dim_e = s.require("dim")?;
        let dim: usize = dim_e
            .value
            .parse()
            .map_err(|_| s.err(dim_e.line, "dim must be a positive integer"))?;
        if dim == 0 || dim > 16 {
            return Err(s.err(dim_e.line, "dim must be between 1 and 16"));
        }
        let name = s.string("name", "M");
        let structure = match s.get("structure") {
            None => Structure::Smooth,
            Some(e) => match e.value.to_ascii_lowercase().as_str() {
                "smooth" => Structure::Smooth,
                "riemannian" => Structure::Riemannian,
                "lorentzian" => Structure::Lorentzian,
                v => return Err(s.err(e.line, format!("unknown structure `{}`", v))),
            },
        };
        let start = match s.get("start_index") {
            None => 1,
            Some(e) => e
                .value
                .parse()
                .map_err(|_| s.err(e.line, "start_index must be a non-negative integer"))?,
        };
        let mut m = Manifold::new(&name, dim)
            .with_structure(structure)
            .with_start_index(start);

        for sub in self.sc.of_kind("subset") {
            sub.check_keys(&["in", "intersection"])?;
            let n = sub.name()?;
            let r = match sub.get("intersection") {
                Some(e) => {
                    let parts = split_top(&e.value);
                    if parts.len() != 2 {
                        return Err(sub.err(e.line, "intersection takes two subsets"));
                    }
                    m.declare_intersection(n, &parts[0], &parts[1])
                }
                None => {
                    let sup = sub.list("in");
                    let sup: Vec<&str> = sup.iter().map(String::as_str).collect();
                    m.open_subset(n, &sup)
                }
            };
            r.map_err(|e| sub.here(format!("geometry: {}", e)))?;
        }
        if let Some(e) = s.get("union") {
            let parts = split_top(&e.value);
            let parts: Vec<&str> = parts.iter().map(String::as_str).collect();
            m.declare_union(&name, &parts)
                .map_err(|err| s.err(e.line, format!("geometry: {}", err)))?;
        }
        for c in self.sc.of_kind("chart") {
            c.check_keys(&["domain", "coords", "restrictions"])?;
            let n = c.name()?;
            let coords = split_top(&c.require("coords")?.value);
            let coords: Vec<&str> = coords.iter().map(String::as_str).collect();
            let mut restr = Vec::new();
            if let Some(e) = c.get("restrictions") {
                for r in split_top(&e.value) {
                    restr.push(
                        Restriction::parse(&r).map_err(|err| {
                            c.err(e.line, format!("restriction `{}`: {}", r, err))
                        })?,
                    );
                }
            }
            let domain = c.string("domain", &name);
            m.add_chart(n, &domain, &coords, restr)
                .map_err(|e| c.here(format!("geometry: {}", e)))?;
        }
        for t in self.sc.of_kind("transition") {
            t.check_keys(&["from", "to", "domain", "map", "inverse"])?;
            let (from, to) = (&t.require("from")?.value, &t.require("to")?.value);
            let fwd = exprs(t, t.require("map")?)?;
            let inv = exprs(t, t.require("inverse")?)?;
            let domain = match t.get("domain") {
                Some(e) => e.value.clone(),
                None => m
                    .chart(from)
                    .map_err(|e| t.here(format!("geometry: {}", e)))?
                    .domain
                    .clone(),
            };
            m.add_transition(from, to, &domain, fwd, inv)
                .map_err(|e| t.here(format!("geometry: {}", e)))?;
        }
        Ok(m.freeze())
    }

    /// `name(args) = body`: numeric implementations of a user function and
    /// its partial derivatives up to total order 4.
    fn functions(&self) -> Result<FnTable, ScenarioError> {
        let mut t = FnTable::new();
        let Some(s) = self.sc.single("functions") else {
            return Ok(t);
        };
        for e in &s.entries {
            let (name, args) = e
                .key
                .strip_suffix(')')
                .and_then(|k| k.split_once('('))
                .ok_or_else(|| s.err(e.line, format!("expected `name(args)`, got `{}`", e.key)))?;
            let args: Vec<String> = split_top(args);
            if args.is_empty() || args.iter().any(|a| a.is_empty()) {
                return Err(s.err(e.line, "function needs at least one argument"));
            }
            let body = expr(s, e)?;
            let vars: Vec<&str> = args.iter().map(String::as_str).collect();
            for orders in multi_indices(args.len(), 4) {
                let mut d = body.clone();
                for (a, &k) in vars.iter().zip(&orders) {
                    for _ in 0..k {
                        d = d.diff(a);
                    }
                }
                let c = Compiled::new(&[d], &vars, &FnTable::new())
                    .map_err(|err| s.err(e.line, format!("function body: {}", err)))?;
                t.insert(name.trim(), &orders, move |x: &[Complex64]| {
                    c.eval(x)
                        .map(|v| v[0])
                        .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
                });
            }
        }
        Ok(t)
    }

    fn bundle(&self, m: &Arc<Manifold>) -> Result<Option<VectorBundle>, ScenarioError> {
        let Some(s) = self.sc.single("bundle") else {
            return Ok(None);
        };
        s.check_keys(&["name", "rank", "field", "tangent"])?;
        let name = s.string("name", "E");
        if s.boolean("tangent")? {
            if let Some(e) = s.get("rank").filter(|e| e.value != m.dim().to_string()) {
                return Err(s.err(e.line, "the tangent bundle has rank equal to the dimension"));
            }
            return VectorBundle::tangent(&name, m)
                .map(Some)
                .map_err(|e| s.here(format!("bundle: {}", e)));
        }
        let re = s.require("rank")?;
        let rank: usize = re
            .value
            .parse()
            .map_err(|_| s.err(re.line, "rank must be a positive integer"))?;
        if rank == 0 {
            return Err(s.err(re.line, "rank must be a positive integer"));
        }
        let field = match s.get("field") {
            None => Field::Real,
            Some(e) => match e.value.as_str() {
                "real" => Field::Real,
                "complex" => Field::Complex,
                v => {
                    return Err(s.err(
                        e.line,
                        format!("field must be real or complex, got `{}`", v),
                    ))
                }
            },
        };
        Ok(Some(VectorBundle::new(&name, rank, field, m)))
    }

    fn frames(&self, b: &mut VectorBundle) -> Result<(), ScenarioError> {
        let start = b.base().start_index();
        for s in self.sc.of_kind("frame") {
            let n = s.name()?;
            let chart = s.require("chart")?.value.clone();
            let vec_entries: Vec<&Entry> = s
                .entries
                .iter()
                .filter(|e| e.key != "chart" && e.key != "domain")
                .collect();
            if vec_entries.is_empty() {
                let domain = match s.get("domain") {
                    Some(e) => e.value.clone(),
                    None => b
                        .base()
                        .chart(&chart)
                        .map_err(|e| s.here(format!("geometry: {}", e)))?
                        .domain
                        .clone(),
                };
                b.add_frame(n, &domain, &chart)
                    .map_err(|e| s.here(format!("bundle: {}", e)))?;
                continue;
            }
            if !b.is_tangent() {
                return Err(s.here("frames given by vector fields need a tangent bundle"));
            }
            let r = b.rank();
            let mut vectors = vec![vec![Expr::zero(); r]; r];
            let mut seen = vec![false; r];
            for e in vec_entries {
                let i = index(s, e.line, &e.key, start, r)?;
                let comps = exprs(s, e)?;
                if comps.len() != r {
                    return Err(s.err(
                        e.line,
                        format!("vector needs {} components, got {}", r, comps.len()),
                    ));
                }
                for (j, c) in comps.into_iter().enumerate() {
                    vectors[j][i] = c;
                }
                seen[i] = true;
            }
            if let Some(i) = seen.iter().position(|x| !x) {
                return Err(s.here(format!("vector {} missing", i + start)));
            }
            b.add_vector_frame(n, &chart, vectors)
                .map_err(|e| s.here(format!("bundle: {}", e)))?;
        }
        Ok(())
    }

    fn frame_changes(&self, b: &mut VectorBundle) -> Result<(), ScenarioError> {
        let start = b.base().start_index();
        let r = b.rank();
        for s in self.sc.of_kind("frame_change") {
            let from = s.require("from")?.value.clone();
            let to = s.require("to")?.value.clone();
            let chart = s.require("chart")?.value.clone();
            let mut g = vec![vec![Expr::zero(); r]; r];
            let mut rows = 0;
            for e in s
                .entries
                .iter()
                .filter(|e| !["from", "to", "chart", "domain"].contains(&e.key.as_str()))
            {
                let i = index(s, e.line, &e.key, start, r)?;
                let row = exprs(s, e)?;
                if row.len() != r {
                    return Err(s.err(
                        e.line,
                        format!("row needs {} entries, got {}", r, row.len()),
                    ));
                }
                g[i] = row;
                rows += 1;
            }
            if rows != r {
                return Err(s.here(format!("frame change needs {} rows, got {}", r, rows)));
            }
            let domain = match s.get("domain") {
                Some(e) => e.value.clone(),
                None => b
                    .base()
                    .chart(&chart)
                    .map_err(|e| s.here(format!("geometry: {}", e)))?
                    .domain
                    .clone(),
            };
            b.set_frame_change(&from, &to, &domain, &chart, g)
                .map_err(|e| s.here(format!("bundle: {}", e)))?;
        }
        Ok(())
    }

    fn points(&self, m: &Arc<Manifold>) -> Result<Vec<Point>, ScenarioError> {
        let mut out = Vec::new();
        for s in self.sc.of_kind("point") {
            s.check_keys(&["chart", "coords"])?;
            let coords = exprs(s, s.require("coords")?)?;
            let p = m
                .point(s.name()?, &s.require("chart")?.value, coords)
                .map_err(|e| s.here(format!("geometry: {}", e)))?;
            out.push(p);
        }
        Ok(out)
    }

    fn sections(&self, b: &VectorBundle) -> Result<Vec<BundleSection>, ScenarioError> {
        let mut out: Vec<BundleSection> = Vec::new();
        for s in self.sc.of_kind("section") {
            let n = s.name()?;
            let domain = s.string("domain", b.base().name());
            let mut sec = if let Some(e) = s.get("sum") {
                let parts = split_top(&e.value);
                let mut acc: Option<BundleSection> = None;
                for p in &parts {
                    let t = out
                        .iter()
                        .find(|x| &x.name == p)
                        .ok_or_else(|| s.err(e.line, format!("unknown section `{}`", p)))?;
                    acc = Some(match acc {
                        None => t.clone(),
                        Some(a) => a.add(t, n),
                    });
                }
                let mut a = acc.ok_or_else(|| s.err(e.line, "empty sum"))?;
                a.name = n.into();
                a
            } else {
                BundleSection::new(n, &domain)
            };
            for e in s
                .entries
                .iter()
                .filter(|e| !["domain", "sum", "continue"].contains(&e.key.as_str()))
            {
                b.frame(&e.key)
                    .map_err(|err| s.err(e.line, format!("bundle: {}", err)))?;
                let comps = exprs(s, e)?;
                if comps.len() != b.rank() {
                    return Err(s.err(
                        e.line,
                        format!("section needs {} components, got {}", b.rank(), comps.len()),
                    ));
                }
                sec.set(&e.key, comps);
            }
            // `continue = FRAME via SUBSET`
            if let Some(e) = s.get("continue") {
                let (frame, overlap) = e
                    .value
                    .split_once(" via ")
                    .ok_or_else(|| s.err(e.line, "expected `continue = FRAME via SUBSET`"))?;
                sec = b
                    .continue_section(&sec, frame.trim(), overlap.trim())
                    .map_err(|err| s.err(e.line, format!("bundle: {}", err)))?;
            }
            b.check_section(&sec)
                .map_err(|err| s.here(format!("bundle: {}", err)))?;
            out.push(sec);
        }
        Ok(out)
    }

    fn metric(
        &self,
        m: &Arc<Manifold>,
        b: Option<&VectorBundle>,
    ) -> Result<Option<Metric>, ScenarioError> {
        let Some(s) = self.sc.single("metric") else {
            return Ok(None);
        };
        let start = m.start_index();
        let n = m.dim();
        let name = s.string("name", "g");
        let signature = match s.get("signature") {
            Some(e) if e.value == "lorentzian" => Signature::Lorentzian,
            Some(e) if e.value != "riemannian" => {
                return Err(s.err(e.line, format!("unknown signature `{}`", e.value)))
            }
            _ if m.structure() == Structure::Lorentzian => Signature::Lorentzian,
            _ => Signature::Riemannian,
        };
        let meta = [
            "name",
            "signature",
            "frame",
            "symbol",
            "chart",
            "embedding",
            "ambient",
            "conformal",
        ];
        let g = if let Some(e) = s.get("embedding") {
            // pullback of a constant diagonal metric along an embedding
            let chart = s.require("chart")?.value.clone();
            let f = exprs(s, e)?;
            let ambient = match s.get("ambient") {
                Some(a) => exprs(s, a)?,
                None => vec![Expr::one(); f.len()],
            };
            if ambient.len() != f.len() {
                return Err(s.here("ambient metric and embedding have different lengths"));
            }
            let mut target = Manifold::new("ambient", f.len());
            let coords: Vec<String> = (0..f.len()).map(|k| format!("ambient_x{}", k)).collect();
            let cr: Vec<&str> = coords.iter().map(String::as_str).collect();
            target
                .add_chart("cart", "ambient", &cr, vec![])
                .map_err(|err| s.here(format!("geometry: {}", err)))?;
            let target = target.freeze();
            let cof = Coframe::coordinate(target.chart("cart").unwrap());
            let h: Vec<Vec<Expr>> = (0..f.len())
                .map(|i| {
                    (0..f.len())
                        .map(|j| {
                            if i == j {
                                ambient[i].clone()
                            } else {
                                Expr::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            let h = Metric::new("h", signature, &cof, h)
                .map_err(|err| s.here(format!("connection: {}", err)))?;
            let map = SmoothMap::new("embedding", m, &target)
                .with(&chart, "cart", f)
                .map_err(|err| s.err(e.line, format!("connection: {}", err)))?;
            pullback_metric(&h, &map, &chart, &name)
                .map_err(|err| s.here(format!("connection: {}", err)))?
        } else {
            let cof = match (s.get("frame"), s.get("chart")) {
                (Some(f), _) => {
                    let b = b.ok_or_else(|| {
                        s.err(f.line, "a metric on a frame needs the tangent bundle")
                    })?;
                    b.dual_coframe(&f.value, &s.string("symbol", "e"))
                        .map_err(|err| s.err(f.line, format!("bundle: {}", err)))?
                }
                (None, Some(c)) => Coframe::coordinate(
                    m.chart(&c.value)
                        .map_err(|err| s.err(c.line, format!("geometry: {}", err)))?,
                ),
                (None, None) => return Err(s.here("metric needs `frame` or `chart`")),
            };
            let mut g = vec![vec![Expr::zero(); n]; n];
            for e in s.entries.iter().filter(|e| !meta.contains(&e.key.as_str())) {
                let (i, j) = e
                    .key
                    .split_once(',')
                    .ok_or_else(|| s.err(e.line, format!("expected `i,j`, got `{}`", e.key)))?;
                let (i, j) = (
                    index(s, e.line, i, start, n)?,
                    index(s, e.line, j, start, n)?,
                );
                let v = expr(s, e)?;
                g[i][j] = v.clone();
                g[j][i] = v;
            }
            Metric::new(&name, signature, &cof, g)
                .map_err(|err| s.here(format!("connection: {}", err)))?
        };
        let g = match s.get("conformal") {
            Some(e) => g.conformal(&name, &expr(s, e)?),
            None => g,
        };
        Ok(Some(g))
    }

    fn connection(
        &self,
        b: Option<&VectorBundle>,
        g: Option<&Metric>,
    ) -> Result<Option<BundleConnection>, ScenarioError> {
        let head = self.sc.of_kind("connection").find(|s| s.name.is_none());
        let per_frame: Vec<&RawSection> = self
            .sc
            .of_kind("connection")
            .filter(|s| s.name.is_some())
            .collect();
        if head.is_none() && per_frame.is_empty() {
            return Ok(None);
        }
        let any = head.or(per_frame.first().copied()).unwrap();
        let b = b.ok_or_else(|| any.here("a connection needs a [bundle]"))?;
        let name = head
            .map(|h| h.string("name", "nabla"))
            .unwrap_or_else(|| "nabla".into());
        let mut conn = match head {
            Some(h) if h.boolean("levi_civita")? => {
                h.check_keys(&["name", "levi_civita"])?;
                let g = g.ok_or_else(|| h.here("levi_civita needs a [metric]"))?;
                levi_civita(g, b, &name).map_err(|e| h.here(format!("connection: {}", e)))?
            }
            Some(h) => {
                h.check_keys(&["name", "levi_civita"])?;
                BundleConnection::new(&name, b)
            }
            None => BundleConnection::new(&name, b),
        };
        let start = b.base().start_index();
        for s in per_frame {
            let frame = s.name()?;
            let cof = b
                .coordinate_coframe(frame)
                .map_err(|e| s.here(format!("bundle: {}", e)))?;
            conn.set_flat(frame, &cof);
            for e in &s.entries {
                let (ix, diff) = e
                    .key
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| s.err(e.line, format!("expected `i,j dX`, got `{}`", e.key)))?;
                let (i, j) = ix
                    .split_once(',')
                    .ok_or_else(|| s.err(e.line, format!("expected `i,j`, got `{}`", ix)))?;
                let (i, j) = (
                    index(s, e.line, i, start, b.rank())?,
                    index(s, e.line, j, start, b.rank())?,
                );
                let k = differential(s, e.line, diff.trim(), &cof)?;
                let mut comps = vec![Expr::zero(); cof.dim()];
                comps[k] = expr(s, e)?;
                let cur = conn.forms(frame).unwrap()[i][j].clone();
                let w = cur
                    .add(&DiffForm::one_form(&cof, comps))
                    .map_err(|err| s.err(e.line, format!("forms: {}", err)))?;
                conn.set_form(frame, i, j, w)
                    .map_err(|err| s.err(e.line, format!("connection: {}", err)))?;
            }
        }
        Ok(Some(conn))
    }

    fn curvature(&self, b: Option<&VectorBundle>) -> Result<Vec<CurvatureMatrix>, ScenarioError> {
        let mut out = Vec::new();
        for s in self.sc.of_kind("curvature") {
            let b = b.ok_or_else(|| s.here("curvature needs a [bundle]"))?;
            let frame = s.name()?;
            let cof = b
                .coordinate_coframe(frame)
                .map_err(|e| s.here(format!("bundle: {}", e)))?;
            let start = b.base().start_index();
            let r = b.rank();
            let mut m = vec![vec![DiffForm::zero(&cof, 2); r]; r];
            for e in &s.entries {
                let (ix, diff) = e.key.split_once(char::is_whitespace).ok_or_else(|| {
                    s.err(e.line, format!("expected `i,j dX^dY`, got `{}`", e.key))
                })?;
                let (i, j) = ix
                    .split_once(',')
                    .ok_or_else(|| s.err(e.line, format!("expected `i,j`, got `{}`", ix)))?;
                let (i, j) = (
                    index(s, e.line, i, start, r)?,
                    index(s, e.line, j, start, r)?,
                );
                let parts: Vec<&str> = diff.split(['^', '∧']).map(str::trim).collect();
                if parts.len() != 2 {
                    return Err(s.err(e.line, "curvature entries are 2-forms `dX^dY`"));
                }
                let ks = vec![
                    differential(s, e.line, parts[0], &cof)?,
                    differential(s, e.line, parts[1], &cof)?,
                ];
                let w = DiffForm::from_components(&cof, 2, vec![(ks, expr(s, e)?)])
                    .map_err(|err| s.err(e.line, format!("forms: {}", err)))?;
                m[i][j] = m[i][j]
                    .add(&w)
                    .map_err(|err| s.err(e.line, format!("forms: {}", err)))?;
            }
            out.push(
                CurvatureMatrix::new(frame, m).map_err(|e| s.here(format!("connection: {}", e)))?,
            );
        }
        Ok(out)
    }

    fn classes(
        &self,
        b: Option<&VectorBundle>,
    ) -> Result<Vec<(String, Arc<CharClass>)>, ScenarioError> {
        let mut out = Vec::new();
        for s in self.sc.of_kind("class") {
            s.check_keys(&["kind", "type", "g", "var"])?;
            let n = s.name()?;
            let b = b.ok_or_else(|| s.here("a class needs a [bundle]"))?;
            let c = match s.get("kind") {
                Some(e) => {
                    let k = Predefined::from_name(&e.value)
                        .ok_or_else(|| s.err(e.line, format!("unknown class `{}`", e.value)))?;
                    CharClass::predefined(k, b)
                        .map_err(|err| s.err(e.line, format!("characteristic class: {}", err)))?
                }
                None => {
                    let te = s.require("type")?;
                    let ty = ClassType::from_name(&te.value).ok_or_else(|| {
                        s.err(te.line, format!("unknown class type `{}`", te.value))
                    })?;
                    let g = expr(s, s.require("g")?)?;
                    let var = s.string("var", "x");
                    CharClass::new(b, n, ty, g, &var)
                        .map_err(|err| s.here(format!("characteristic class: {}", err)))?
                }
            };
            out.push((n.to_string(), c));
        }
        Ok(out)
    }

    fn compute(&self, classes: &[(String, Arc<CharClass>)]) -> Result<Compute, ScenarioError> {
        let Some(s) = self.sc.single("compute") else {
            return Ok(Compute::default());
        };
        s.check_keys(&[
            "forms",
            "frames",
            "chart",
            "coframe",
            "curvature",
            "closed",
            "sections",
            "points",
            "long",
        ])?;
        let c = Compute {
            forms: s.list("forms"),
            frames: s.list("frames"),
            chart: s.get("chart").map(|e| e.value.clone()),
            coframe: s.get("coframe").map(|e| e.value.clone()),
            curvature: s.boolean("curvature")?,
            closed: s.boolean("closed")?,
            sections: s.list("sections"),
            points: s.list("points"),
            long: s.boolean("long")?,
            line: s.line,
        };
        for f in &c.forms {
            if !classes.iter().any(|(n, _)| n == f) {
                return Err(s.err(
                    s.get("forms").unwrap().line,
                    format!("unknown class `{}`", f),
                ));
            }
        }
        Ok(c)
    }

    fn expects(&self, classes: &[(String, Arc<CharClass>)]) -> Result<Vec<Expect>, ScenarioError> {
        let Some(s) = self.sc.single("expect") else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for e in &s.entries {
            // form:degree or form:degree[i,j]
            let (form, rest) = e
                .key
                .split_once(':')
                .ok_or_else(|| s.err(e.line, format!("expected `form:degree`, got `{}`", e.key)))?;
            if !classes.iter().any(|(n, _)| n == form) {
                return Err(s.err(e.line, format!("unknown class `{}`", form)));
            }
            let (deg, ix) = match rest.split_once('[') {
                Some((d, ix)) => (
                    d,
                    Some(
                        ix.strip_suffix(']')
                            .ok_or_else(|| s.err(e.line, "unterminated index list"))?,
                    ),
                ),
                None => (rest, None),
            };
            let degree: usize = deg
                .trim()
                .parse()
                .map_err(|_| s.err(e.line, format!("`{}` is not a degree", deg)))?;
            out.push(Expect {
                line: e.line,
                key: e.key.clone(),
                form: form.into(),
                degree,
                indices: ix
                    .map(|ix| {
                        split_top(ix)
                            .iter()
                            .map(|i| i.parse::<usize>())
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .transpose()
                    .map_err(|_| s.err(e.line, "bad index"))?,
                expr: expr(s, e)?,
            });
        }
        Ok(out)
    }

    fn integrate(
        &self,
        classes: &[(String, Arc<CharClass>)],
    ) -> Result<Option<Integrate>, ScenarioError> {
        let Some(s) = self.sc.single("integrate") else {
            return Ok(None);
        };
        s.check_keys(&["form", "chart", "bounds", "expected"])?;
        let fe = s.require("form")?;
        if !classes.iter().any(|(n, _)| *n == fe.value) {
            return Err(s.err(fe.line, format!("unknown class `{}`", fe.value)));
        }
        let mut bounds = Vec::new();
        if let Some(e) = s.get("bounds") {
            for b in split_top(&e.value) {
                bounds.push(b.parse::<AxisBounds>().map_err(|err| s.err(e.line, err))?);
            }
        }
        let expected = match s.get("expected") {
            Some(e) => Some(
                e.value
                    .parse::<f64>()
                    .map_err(|_| s.err(e.line, "expected must be a number"))?,
            ),
            None => None,
        };
        Ok(Some(Integrate {
            line: s.line,
            form: fe.value.clone(),
            chart: s.get("chart").map(|e| e.value.clone()),
            bounds,
            expected,
        }))
    }
}

/// Index of the coordinate named by `dX`.
fn differential(
    s: &RawSection,
    line: usize,
    d: &str,
    cof: &Coframe,
) -> Result<usize, ScenarioError> {
    let c = d
        .strip_prefix('d')
        .ok_or_else(|| s.err(line, format!("expected a differential `dX`, got `{}`", d)))?;
    cof.coords().iter().position(|x| x == c).ok_or_else(|| {
        s.err(
            line,
            format!("`{}` is not a coordinate of chart {}", c, cof.chart()),
        )
    })
}

/// All `n`-tuples of non-negative integers with sum at most `max`.
fn multi_indices(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                let used: u32 = v.iter().sum();
                (0..=max - used).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINKOWSKI: &str = "
[manifold]
name = M
dim = 2
[chart.X]
coords = t, x
[bundle]
rank = 1
field = complex
[frame.e]
chart = X
[connection.e]
1,1 dx = I*A(t)
[class.ch]
kind = ChernChar
[compute]
forms = ch
";

    #[test]
    fn parses_and_builds() {
        let m = Scenario::parse(MINKOWSKI).unwrap().build().unwrap();
        assert_eq!(m.manifold.dim(), 2);
        let conn = m.connection.unwrap();
        assert_eq!(
            conn.forms("e").unwrap()[0][0].comp(&[1]),
            parse("I*A(t)").unwrap()
        );
        assert_eq!(m.compute.forms, vec!["ch".to_string()]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = MINKOWSKI.replace("1,1 dx = I*A(t)", "1,1 dx = I*A(t");
        let e = Scenario::parse(&bad).unwrap().build().err().unwrap();
        assert_eq!(e.line, 13);
        assert!(e.message.contains("expression"));
        let e = Scenario::parse("[manifold]\ndim = 2\n[nonsense]\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = Scenario::parse("dim = 2").unwrap_err();
        assert_eq!(e.line, 1);
        let e = Scenario::parse(&MINKOWSKI.replace("kind = ChernChar", "kind = Euler"))
            .unwrap()
            .build()
            .err()
            .unwrap();
        assert_eq!(e.line, 15);
    }

    #[test]
    fn top_level_split() {
        assert_eq!(
            split_top("f(x, y), 2, [a,b]"),
            vec!["f(x, y)", "2", "[a,b]"]
        );
        assert!(split_top("").is_empty());
        assert_eq!(multi_indices(2, 1).len(), 3);
    }

    #[test]
    fn functions_and_derivatives() {
        let sc = "[manifold]\ndim = 1\n[functions]\na(t) = 2 + sin(t)\n";
        let m = Scenario::parse(sc).unwrap().build().unwrap();
        let e = parse("a''(t)").unwrap();
        let c = Compiled::new(&[e], &["t"], &m.fns).unwrap();
        let v = c.eval_real(&[0.5]).unwrap()[0];
        assert!((v.re + 0.5f64.sin()).abs() < 1e-14);
    }
}
