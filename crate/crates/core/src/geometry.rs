//! Charted manifolds: named open subsets, charts, transition maps, scalar
//! fields and points.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use symexpr::{Complex64, Expr, ExprError, FnTable, Symbol};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("unknown subset `{0}`")]
    UnknownSubset(String),
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("`{0}` is already declared")]
    Duplicate(String),
    #[error("chart `{chart}` has {found} coordinates, manifold has dimension {dim}")]
    Dimension {
        chart: String,
        dim: usize,
        found: usize,
    },
    #[error("coordinate `{0}` is used by two charts")]
    CoordinateClash(String),
    #[error("transition {from} -> {to}: {found} expressions for dimension {dim}")]
    TransitionArity {
        from: String,
        to: String,
        dim: usize,
        found: usize,
    },
    #[error("transition {from} -> {to} is not inverted by the given inverse: coordinate `{coord}` maps to {got}")]
    RoundTrip {
        from: String,
        to: String,
        coord: String,
        got: String,
    },
    #[error("no transition from chart `{from}` to chart `{to}`")]
    NoTransition { from: String, to: String },
    #[error("subset `{sub}` is not contained in `{sup}`")]
    NotContained { sub: String, sup: String },
    #[error("point {coords:?} violates restriction `{restriction}` of chart `{chart}`")]
    Restriction {
        chart: String,
        coords: Vec<String>,
        restriction: String,
    },
    #[error("scalar field `{field}` disagrees between charts `{a}` and `{b}`")]
    Inconsistent { field: String, a: String, b: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Relation in a chart restriction `expr REL 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    NonZero,
    Positive,
    Negative,
    NonNegative,
    NonPositive,
}

/// A coordinate constraint carried by a chart; only checked numerically.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub expr: Expr,
    pub rel: Rel,
}

impl Restriction {
    pub fn new(expr: Expr, rel: Rel) -> Self {
        Restriction { expr, rel }
    }

    /// Parses `lhs OP rhs` with OP one of `!=`, `>`, `<`, `>=`, `<=`.
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        for (op, rel, flip) in [
            ("!=", Rel::NonZero, false),
            (">=", Rel::NonNegative, false),
            ("<=", Rel::NonPositive, false),
            (">", Rel::Positive, false),
            ("<", Rel::Positive, true),
        ] {
            if let Some(k) = src.find(op) {
                let l = symexpr::parse(&src[..k])?;
                let r = symexpr::parse(&src[k + op.len()..]).map_err(|e| shift(e, k + op.len()))?;
                let (e, rel) = match (flip, rel) {
                    (true, _) => (r - l, Rel::Positive),
                    _ => (l - r, rel),
                };
                return Ok(Restriction { expr: e, rel });
            }
        }
        Err(ExprError::Syntax {
            offset: 0,
            message: "expected a relation (!=, <, >, <=, >=)".into(),
        })
    }

    /// Numeric check at a point given as variable bindings.
    pub fn holds(&self, vars: &[&str], x: &[Complex64]) -> bool {
        let Ok(c) = symexpr::Compiled::new(std::slice::from_ref(&self.expr), vars, &FnTable::new())
        else {
            return true;
        };
        let v = match c.eval(x) {
            Ok(v) => v[0],
            Err(_) => return self.rel != Rel::NonZero,
        };
        self.holds_at(v)
    }

    pub(crate) fn holds_at(&self, v: Complex64) -> bool {
        let real = v.im.abs() <= 1e-12 * (1.0 + v.re.abs());
        match self.rel {
            Rel::NonZero => v.norm() > 0.0,
            Rel::Positive => real && v.re > 0.0,
            Rel::Negative => real && v.re < 0.0,
            Rel::NonNegative => real && v.re >= 0.0,
            Rel::NonPositive => real && v.re <= 0.0,
        }
    }
}

fn shift(e: ExprError, by: usize) -> ExprError {
    match e {
        ExprError::Syntax { offset, message } => ExprError::Syntax {
            offset: offset + by,
            message,
        },
        other => other,
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.rel {
            Rel::NonZero => "!=",
            Rel::Positive => ">",
            Rel::Negative => "<",
            Rel::NonNegative => ">=",
            Rel::NonPositive => "<=",
        };
        write!(f, "{} {} 0", self.expr, op)
    }
}

#[derive(Clone, Debug)]
pub struct Subset {
    pub name: String,
    /// Direct supersets; the manifold itself is implicit.
    pub supersets: Vec<String>,
    pub union_of: Vec<Vec<String>>,
    pub intersection_of: Option<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub name: String,
    pub domain: String,
    pub coords: Vec<String>,
    pub restrictions: Vec<Restriction>,
}

impl Chart {
    pub fn coord_exprs(&self) -> Vec<Expr> {
        self.coords.iter().map(|c| Expr::var(c)).collect()
    }

    pub fn index_of(&self, coord: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == coord)
    }

    /// Checks every restriction at the given coordinate values.
    pub fn admits(&self, x: &[Complex64]) -> Result<(), String> {
        let vars: Vec<&str> = self.coords.iter().map(String::as_str).collect();
        match self.restrictions.iter().find(|r| !r.holds(&vars, x)) {
            Some(r) => Err(r.to_string()),
            None => Ok(()),
        }
    }
}

/// Coordinates of chart `to` as functions of the coordinates of `from`.
#[derive(Clone, Debug)]
pub struct Transition {
    pub from: String,
    pub to: String,
    pub domain: String,
    pub exprs: Vec<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Smooth,
    Riemannian,
    Lorentzian,
}

#[derive(Clone, Debug)]
pub struct Manifold {
    name: String,
    dim: usize,
    start_index: usize,
    structure: Structure,
    subsets: Vec<Subset>,
    charts: Vec<Chart>,
    transitions: Vec<Transition>,
}

impl Manifold {
    pub fn new(name: &str, dim: usize) -> Self {
        Manifold {
            name: name.to_string(),
            dim,
            start_index: 1,
            structure: Structure::Smooth,
            subsets: Vec::new(),
            charts: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn with_structure(mut self, s: Structure) -> Self {
        self.structure = s;
        self
    }

    /// First index used when displaying frames and components.
    pub fn with_start_index(mut self, k: usize) -> Self {
        self.start_index = k;
        self
    }

    /// Ends construction; the frozen manifold is immutable and shareable.
    pub fn freeze(self) -> Arc<Manifold> {
        Arc::new(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    fn has_subset(&self, name: &str) -> bool {
        name == self.name || self.subsets.iter().any(|s| s.name == name)
    }

    fn require_subset(&self, name: &str) -> Result<(), GeometryError> {
        if self.has_subset(name) {
            Ok(())
        } else {
            Err(GeometryError::UnknownSubset(name.to_string()))
        }
    }

    fn check_fresh(&self, name: &str) -> Result<(), GeometryError> {
        if self.has_subset(name) || self.charts.iter().any(|c| c.name == name) {
            return Err(GeometryError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    /// Declares an open subset of the given supersets (of the whole
    /// manifold when empty).
    pub fn open_subset(&mut self, name: &str, supersets: &[&str]) -> Result<(), GeometryError> {
        self.check_fresh(name)?;
        for s in supersets {
            self.require_subset(s)?;
        }
        self.subsets.push(Subset {
            name: name.to_string(),
            supersets: supersets.iter().map(|s| s.to_string()).collect(),
            union_of: Vec::new(),
            intersection_of: None,
        });
        Ok(())
    }

    /// Records that `whole` is covered by `parts`.
    pub fn declare_union(&mut self, whole: &str, parts: &[&str]) -> Result<(), GeometryError> {
        self.require_subset(whole)?;
        for p in parts {
            self.require_subset(p)?;
            if !self.is_subset(p, whole) {
                return Err(GeometryError::NotContained {
                    sub: p.to_string(),
                    sup: whole.to_string(),
                });
            }
        }
        let list = parts.iter().map(|s| s.to_string()).collect();
        if let Some(s) = self.subsets.iter_mut().find(|s| s.name == whole) {
            s.union_of.push(list);
        }
        Ok(())
    }

    /// Declares `name` as the intersection of `a` and `b`.
    pub fn declare_intersection(
        &mut self,
        name: &str,
        a: &str,
        b: &str,
    ) -> Result<(), GeometryError> {
        self.open_subset(name, &[a, b])?;
        self.subsets.last_mut().unwrap().intersection_of = Some((a.to_string(), b.to_string()));
        Ok(())
    }

    /// Containment through declared supersets; everything lies in the
    /// manifold.
    pub fn is_subset(&self, sub: &str, sup: &str) -> bool {
        if sub == sup || sup == self.name {
            return true;
        }
        let mut stack = vec![sub.to_string()];
        let mut seen = Vec::new();
        while let Some(s) = stack.pop() {
            if s == sup {
                return true;
            }
            if seen.contains(&s) {
                continue;
            }
            if let Some(e) = self.subsets.iter().find(|x| x.name == s) {
                stack.extend(e.supersets.iter().cloned());
            }
            seen.push(s);
        }
        false
    }

    pub fn add_chart(
        &mut self,
        name: &str,
        domain: &str,
        coords: &[&str],
        restrictions: Vec<Restriction>,
    ) -> Result<&Chart, GeometryError> {
        self.check_fresh(name)?;
        self.require_subset(domain)?;
        if coords.len() != self.dim {
            return Err(GeometryError::Dimension {
                chart: name.to_string(),
                dim: self.dim,
                found: coords.len(),
            });
        }
        for (k, c) in coords.iter().enumerate() {
            let taken = coords[..k].contains(c)
                || self
                    .charts
                    .iter()
                    .any(|ch| ch.coords.iter().any(|x| x == c));
            if taken || *c == "pi" || *c == "I" {
                return Err(GeometryError::CoordinateClash(c.to_string()));
            }
        }
        self.charts.push(Chart {
            name: name.to_string(),
            domain: domain.to_string(),
            coords: coords.iter().map(|s| s.to_string()).collect(),
            restrictions,
        });
        Ok(self.charts.last().unwrap())
    }

    pub fn chart(&self, name: &str) -> Result<&Chart, GeometryError> {
        self.charts
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| GeometryError::UnknownChart(name.to_string()))
    }

    /// The chart owning a coordinate symbol.
    pub fn chart_of_coord(&self, coord: &str) -> Option<&Chart> {
        self.charts
            .iter()
            .find(|c| c.coords.iter().any(|x| x == coord))
    }

    /// Registers the transition `from -> to` together with its inverse on
    /// the subset `domain`, after checking both round trips canonically.
    pub fn add_transition(
        &mut self,
        from: &str,
        to: &str,
        domain: &str,
        exprs: Vec<Expr>,
        inverse: Vec<Expr>,
    ) -> Result<&Transition, GeometryError> {
        let (a, b) = (self.chart(from)?.clone(), self.chart(to)?.clone());
        self.require_subset(domain)?;
        for c in [&a, &b] {
            if !self.is_subset(domain, &c.domain) {
                return Err(GeometryError::NotContained {
                    sub: domain.to_string(),
                    sup: c.domain.clone(),
                });
            }
        }
        for (f, t, e) in [(from, to, &exprs), (to, from, &inverse)] {
            if e.len() != self.dim {
                return Err(GeometryError::TransitionArity {
                    from: f.to_string(),
                    to: t.to_string(),
                    dim: self.dim,
                    found: e.len(),
                });
            }
        }
        round_trip(&a, &b, &exprs, &inverse)?;
        round_trip(&b, &a, &inverse, &exprs)?;
        self.transitions
            .retain(|t| !((t.from == from && t.to == to) || (t.from == to && t.to == from)));
        self.transitions.push(Transition {
            from: from.into(),
            to: to.into(),
            domain: domain.into(),
            exprs,
        });
        self.transitions.push(Transition {
            from: to.into(),
            to: from.into(),
            domain: domain.into(),
            exprs: inverse,
        });
        Ok(&self.transitions[self.transitions.len() - 2])
    }

    pub fn transition(&self, from: &str, to: &str) -> Result<&Transition, GeometryError> {
        self.transitions
            .iter()
            .find(|t| t.from == from && t.to == to)
            .ok_or_else(|| GeometryError::NoTransition {
                from: from.to_string(),
                to: to.to_string(),
            })
    }

    /// Rewrites an expression in the coordinates of `from` into those of
    /// `to` (substituting `from`-coordinates as functions of `to`).
    pub fn express(&self, e: &Expr, from: &str, to: &str) -> Result<Expr, GeometryError> {
        if from == to {
            return Ok(e.clone());
        }
        let back = self.transition(to, from)?;
        let src = self.chart(from)?;
        let map: HashMap<Symbol, Expr> = src
            .coords
            .iter()
            .map(|c| Symbol::from(c.as_str()))
            .zip(back.exprs.iter().cloned())
            .collect();
        Ok(e.subs(&map)?)
    }

    /// Jacobian of a transition: `J[j][i] = ∂y^j/∂x^i` in the source
    /// coordinates `x`.
    pub fn jacobian(&self, from: &str, to: &str) -> Result<Vec<Vec<Expr>>, GeometryError> {
        let t = self.transition(from, to)?;
        let src = self.chart(from)?;
        Ok(t.exprs
            .iter()
            .map(|y| src.coords.iter().map(|x| y.diff(x)).collect())
            .collect())
    }

    /// Builds a point from constant coordinates, checking restrictions.
    pub fn point(
        &self,
        name: &str,
        chart: &str,
        coords: Vec<Expr>,
    ) -> Result<Point, GeometryError> {
        let ch = self.chart(chart)?;
        if coords.len() != self.dim {
            return Err(GeometryError::Dimension {
                chart: chart.to_string(),
                dim: self.dim,
                found: coords.len(),
            });
        }
        let x: Vec<Complex64> = coords
            .iter()
            .map(|c| symexpr::eval_numeric(c, &HashMap::new(), &FnTable::new()))
            .collect::<Result<_, _>>()?;
        ch.admits(&x)
            .map_err(|restriction| GeometryError::Restriction {
                chart: chart.to_string(),
                coords: coords.iter().map(|c| c.to_string()).collect(),
                restriction,
            })?;
        Ok(Point {
            name: name.to_string(),
            chart: chart.to_string(),
            coords,
        })
    }
}

fn round_trip(a: &Chart, b: &Chart, fwd: &[Expr], inv: &[Expr]) -> Result<(), GeometryError> {
    // inv expresses a-coordinates through b-coordinates; feeding fwd back in
    // must return the a-coordinates.
    let map: HashMap<Symbol, Expr> = b
        .coords
        .iter()
        .map(|c| Symbol::from(c.as_str()))
        .zip(fwd.iter().cloned())
        .collect();
    for (c, e) in a.coords.iter().zip(inv) {
        let got = e.subs(&map)?;
        if !crate::same(&got, &Expr::var(c)) {
            return Err(GeometryError::RoundTrip {
                from: a.name.clone(),
                to: b.name.clone(),
                coord: c.clone(),
                got: got.to_string(),
            });
        }
    }
    Ok(())
}

/// A smooth function given by one expression per chart.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub name: String,
    pub exprs: Vec<(String, Expr)>,
}

impl ScalarField {
    pub fn new(name: &str) -> Self {
        ScalarField {
            name: name.to_string(),
            exprs: Vec::new(),
        }
    }

    pub fn with(mut self, chart: &str, e: Expr) -> Self {
        self.set(chart, e);
        self
    }

    /// The same constant on every chart of `m`.
    pub fn constant(m: &Manifold, name: &str, c: Expr) -> Self {
        let mut f = ScalarField::new(name);
        for ch in m.charts() {
            f.set(&ch.name, c.clone());
        }
        f
    }

    pub fn set(&mut self, chart: &str, e: Expr) {
        match self.exprs.iter_mut().find(|(c, _)| c == chart) {
            Some(slot) => slot.1 = e,
            None => self.exprs.push((chart.to_string(), e)),
        }
    }

    pub fn get(&self, chart: &str) -> Option<&Expr> {
        self.exprs.iter().find(|(c, _)| c == chart).map(|(_, e)| e)
    }

    /// The expression in `chart`, converting from any chart with a
    /// registered transition when not stored.
    pub fn expr_in(&self, m: &Manifold, chart: &str) -> Result<Expr, GeometryError> {
        if let Some(e) = self.get(chart) {
            return Ok(e.clone());
        }
        for (c, e) in &self.exprs {
            if m.transition(chart, c).is_ok() {
                return m.express(e, c, chart);
            }
        }
        Err(GeometryError::NoTransition {
            from: self
                .exprs
                .first()
                .map(|(c, _)| c.clone())
                .unwrap_or_default(),
            to: chart.to_string(),
        })
    }

    /// Checks every pair of stored charts linked by a transition.
    pub fn check_consistency(&self, m: &Manifold) -> Result<(), GeometryError> {
        for (i, (a, ea)) in self.exprs.iter().enumerate() {
            for (b, eb) in &self.exprs[i + 1..] {
                if m.transition(b, a).is_err() {
                    continue;
                }
                let moved = m.express(ea, a, b)?;
                if !crate::same(&moved, eb) {
                    return Err(GeometryError::Inconsistent {
                        field: self.name.clone(),
                        a: a.clone(),
                        b: b.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Re-expresses the `from`-chart expression of `f` in chart `to`.
pub fn field_on_overlap(
    m: &Manifold,
    f: &ScalarField,
    from: &str,
    to: &str,
) -> Result<Expr, GeometryError> {
    let e = f.get(from).ok_or_else(|| GeometryError::NoTransition {
        from: from.into(),
        to: to.into(),
    })?;
    m.express(e, from, to)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub name: String,
    pub chart: String,
    pub coords: Vec<Expr>,
}

impl Point {
    /// Coordinates in another chart via the registered transition.
    pub fn coords_in(&self, m: &Manifold, chart: &str) -> Result<Vec<Expr>, GeometryError> {
        if chart == self.chart {
            return Ok(self.coords.clone());
        }
        let t = m.transition(&self.chart, chart)?;
        let src = m.chart(&self.chart)?;
        let map: HashMap<Symbol, Expr> = src
            .coords
            .iter()
            .map(|c| Symbol::from(c.as_str()))
            .zip(self.coords.iter().cloned())
            .collect();
        let out = t
            .exprs
            .iter()
            .map(|e| e.subs(&map))
            .collect::<Result<Vec<_>, _>>()?;
        m.point(&self.name, chart, out.clone())?;
        Ok(out)
    }

    /// Variable map for substitution in `chart`.
    pub fn bindings(
        &self,
        m: &Manifold,
        chart: &str,
    ) -> Result<HashMap<Symbol, Expr>, GeometryError> {
        let coords = self.coords_in(m, chart)?;
        let ch = m.chart(chart)?;
        Ok(ch
            .coords
            .iter()
            .map(|c| Symbol::from(c.as_str()))
            .zip(coords)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use symexpr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn rp1() -> Manifold {
        let mut m = Manifold::new("RP1", 1);
        m.open_subset("U", &[]).unwrap();
        m.open_subset("V", &[]).unwrap();
        m.declare_union("RP1", &["U", "V"]).unwrap();
        m.declare_intersection("W", "U", "V").unwrap();
        m.add_chart("cu", "U", &["u"], vec![]).unwrap();
        m.add_chart("cv", "V", &["v"], vec![]).unwrap();
        m.add_transition("cu", "cv", "W", vec![p("1/u")], vec![p("1/v")])
            .unwrap();
        m
    }

    #[test]
    fn projective_line_transition() {
        let m = rp1();
        assert_eq!(m.transition("cv", "cu").unwrap().exprs[0], p("1/v"));
        assert!(m.is_subset("W", "U") && m.is_subset("W", "RP1") && !m.is_subset("U", "W"));
    }

    #[test]
    fn bad_inverse_is_rejected() {
        let mut m = rp1();
        let err = m.add_transition("cu", "cv", "W", vec![p("1/u")], vec![p("2/v")]);
        assert!(matches!(err, Err(GeometryError::RoundTrip { .. })));
    }

    #[test]
    fn identity_transition() {
        let mut m = Manifold::new("R", 2);
        m.add_chart("a", "R", &["x", "y"], vec![]).unwrap();
        m.add_chart("b", "R", &["s", "t"], vec![]).unwrap();
        m.add_transition("a", "b", "R", vec![p("x"), p("y")], vec![p("s"), p("t")])
            .unwrap();
    }

    #[test]
    fn stereographic_s3_round_trip() {
        let mut m = Manifold::new("M", 4);
        m.open_subset("U", &[]).unwrap();
        m.open_subset("V", &[]).unwrap();
        m.declare_intersection("W", "U", "V").unwrap();
        let r = vec![Restriction::parse("x^2+y^2+z^2 != 0").unwrap()];
        m.add_chart("N", "U", &["t", "x", "y", "z"], r).unwrap();
        m.add_chart("S", "V", &["tp", "xp", "yp", "zp"], vec![])
            .unwrap();
        let f = ["t", "x/(x^2+y^2+z^2)", "y/(x^2+y^2+z^2)", "z/(x^2+y^2+z^2)"];
        let g = [
            "tp",
            "xp/(xp^2+yp^2+zp^2)",
            "yp/(xp^2+yp^2+zp^2)",
            "zp/(xp^2+yp^2+zp^2)",
        ];
        m.add_transition(
            "N",
            "S",
            "W",
            f.iter().map(|s| p(s)).collect(),
            g.iter().map(|s| p(s)).collect(),
        )
        .unwrap();
    }

    #[test]
    fn overlap_substitution() {
        let m = rp1();
        let f = ScalarField::new("f").with("cu", p("(1-u)/(1+u^2)"));
        assert_eq!(
            field_on_overlap(&m, &f, "cu", "cv").unwrap(),
            p("v*(v-1)/(v^2+1)")
        );
        let c = ScalarField::constant(&m, "c", Expr::int(3));
        assert_eq!(field_on_overlap(&m, &c, "cu", "cv").unwrap(), Expr::int(3));
        c.check_consistency(&m).unwrap();
    }

    #[test]
    fn sphere_field_in_south_chart() {
        let mut m = Manifold::new("S2", 2);
        m.open_subset("U", &[]).unwrap();
        m.open_subset("V", &[]).unwrap();
        m.declare_intersection("W", "U", "V").unwrap();
        m.add_chart("N", "U", &["x", "y"], vec![]).unwrap();
        m.add_chart("S", "V", &["xp", "yp"], vec![]).unwrap();
        m.add_transition(
            "N",
            "S",
            "W",
            vec![p("x/(x^2+y^2)"), p("y/(x^2+y^2)")],
            vec![p("xp/(xp^2+yp^2)"), p("yp/(xp^2+yp^2)")],
        )
        .unwrap();
        let f = ScalarField::new("f").with("N", p("x^2+y^2"));
        assert_eq!(
            field_on_overlap(&m, &f, "N", "S").unwrap(),
            p("1/(xp^2+yp^2)")
        );
        let bad = f.clone().with("S", p("xp^2+yp^2"));
        assert!(bad.check_consistency(&m).is_err());
        let good = f.with("S", p("1/(xp^2+yp^2)"));
        good.check_consistency(&m).unwrap();
    }

    #[test]
    fn points_respect_restrictions() {
        let mut m = Manifold::new("R", 1);
        m.add_chart("c", "R", &["u"], vec![Restriction::parse("u > 0").unwrap()])
            .unwrap();
        assert!(m.point("p", "c", vec![Expr::int(2)]).is_ok());
        assert!(matches!(
            m.point("q", "c", vec![Expr::int(-1)]),
            Err(GeometryError::Restriction { .. })
        ));
        let r = Restriction::parse("x < 1").unwrap();
        assert_eq!(r.expr, p("1 - x"));
    }

    #[test]
    fn coordinates_are_unique() {
        let mut m = Manifold::new("R", 1);
        m.add_chart("a", "R", &["u"], vec![]).unwrap();
        assert!(matches!(
            m.add_chart("b", "R", &["u"], vec![]),
            Err(GeometryError::CoordinateClash(_))
        ));
        assert!(matches!(
            m.add_chart("c", "R", &["u", "v"], vec![]),
            Err(GeometryError::Dimension { .. })
        ));
    }
}
