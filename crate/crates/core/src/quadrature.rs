//! Tensor Gauss–Legendre integration of top-degree forms over coordinate
//! boxes, with `x = tan θ` substitution on infinite axes.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use symexpr::{Compiled, Complex64, ExprError, FnTable};
use thiserror::Error;

use crate::forms::DiffForm;
use crate::geometry::Chart;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("form has degree {degree}, integration needs the top degree {dim}")]
    NotTopDegree { degree: usize, dim: usize },
    #[error("form is written in coframe {0}, not a coordinate coframe")]
    NotCoordinate(String),
    #[error("bounds given for {0}, which is not a coordinate of the chart")]
    UnknownAxis(String),
    #[error("bad bounds `{0}`")]
    BadBounds(String),
    #[error("point {point:?} violates the chart restrictions: {reason}")]
    Restriction { point: Vec<f64>, reason: String },
    #[error("evaluation failed at {point:?}: {source}")]
    Eval { point: Vec<f64>, source: ExprError },
    #[error("no convergence with {nodes} nodes per axis: last estimates differ by {diff:e}")]
    NoConvergence { nodes: usize, diff: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Finite(f64),
    NegInf,
    PosInf,
}

impl FromStr for Bound {
    type Err = QuadratureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "oo" => Ok(Bound::PosInf),
            "-inf" | "-oo" => Ok(Bound::NegInf),
            t => t
                .parse()
                .map(Bound::Finite)
                .map_err(|_| QuadratureError::BadBounds(s.into())),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{}", v),
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("inf"),
        }
    }
}

/// Bounds on one coordinate axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisBounds {
    pub axis: String,
    pub lo: Bound,
    pub hi: Bound,
}

impl AxisBounds {
    pub fn new(axis: &str, lo: Bound, hi: Bound) -> Self {
        AxisBounds {
            axis: axis.into(),
            lo,
            hi,
        }
    }

    pub fn whole_line(axis: &str) -> Self {
        Self::new(axis, Bound::NegInf, Bound::PosInf)
    }

    pub fn finite(axis: &str, lo: f64, hi: f64) -> Self {
        Self::new(axis, Bound::Finite(lo), Bound::Finite(hi))
    }

    fn check(&self) -> Result<(), QuadratureError> {
        let bad = match (self.lo, self.hi) {
            (Bound::Finite(a), Bound::Finite(b)) => !(a < b) || !a.is_finite() || !b.is_finite(),
            (Bound::PosInf, _) | (_, Bound::NegInf) => true,
            _ => false,
        };
        if bad {
            return Err(QuadratureError::BadBounds(self.to_string()));
        }
        Ok(())
    }

    /// `θ`-interval and the map `θ ↦ (x, dx/dθ)`.
    fn substitution(&self) -> (f64, f64, impl Fn(f64) -> (f64, f64)) {
        let (lo, hi) = (self.lo, self.hi);
        let (a, b) = match (lo, hi) {
            (Bound::Finite(a), Bound::Finite(b)) => (a, b),
            (Bound::NegInf, Bound::PosInf) => (-FRAC_PI_2, FRAC_PI_2),
            (Bound::Finite(_), Bound::PosInf) => (0.0, FRAC_PI_2),
            (Bound::NegInf, Bound::Finite(_)) => (-FRAC_PI_2, 0.0),
            _ => unreachable!("checked bounds"),
        };
        let f = move |t: f64| match (lo, hi) {
            (Bound::Finite(_), Bound::Finite(_)) => (t, 1.0),
            (Bound::Finite(c), _) | (_, Bound::Finite(c)) => {
                (c + t.tan(), 1.0 / (t.cos() * t.cos()))
            }
            _ => (t.tan(), 1.0 / (t.cos() * t.cos())),
        };
        (a, b, f)
    }
}

impl FromStr for AxisBounds {
    type Err = QuadratureError;

    /// `x=lo..hi`, or `x=inf` for the whole line.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (axis, range) = s
            .split_once('=')
            .ok_or_else(|| QuadratureError::BadBounds(s.into()))?;
        let axis = axis.trim();
        if axis.is_empty() {
            return Err(QuadratureError::BadBounds(s.into()));
        }
        let b = match range.trim() {
            "inf" | "oo" => AxisBounds::whole_line(axis),
            r => {
                let (lo, hi) = r
                    .split_once("..")
                    .ok_or_else(|| QuadratureError::BadBounds(s.into()))?;
                AxisBounds::new(axis, lo.parse()?, hi.parse()?)
            }
        };
        b.check()?;
        Ok(b)
    }
}

impl fmt::Display for AxisBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}..{}", self.axis, self.lo, self.hi)
    }
}

/// What to integrate and how precisely.
pub struct IntegrationTask<'a> {
    pub form: &'a DiffForm,
    pub chart: &'a Chart,
    /// Missing axes default to the whole line.
    pub bounds: Vec<AxisBounds>,
    pub tolerance: f64,
    pub fns: FnTable,
    pub initial_nodes: usize,
    pub max_nodes: usize,
}

impl<'a> IntegrationTask<'a> {
    pub fn new(form: &'a DiffForm, chart: &'a Chart) -> Self {
        IntegrationTask {
            form,
            chart,
            bounds: Vec::new(),
            tolerance: 1e-8,
            fns: FnTable::new(),
            initial_nodes: 64,
            max_nodes: 1024,
        }
    }

    pub fn bounds(mut self, b: Vec<AxisBounds>) -> Self {
        self.bounds = b;
        self
    }

    pub fn tolerance(mut self, t: f64) -> Self {
        self.tolerance = t;
        self
    }

    pub fn functions(mut self, fns: FnTable) -> Self {
        self.fns = fns;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// Difference between the last two refinements.
    pub error: f64,
    /// Nodes per axis in the final estimate.
    pub nodes: usize,
}

impl fmt::Display for Integral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.im.abs() > self.error.max(1e-15) {
            write!(f, "{} ± {:.1e}", self.value, self.error)
        } else {
            write!(f, "{:.9} ± {:.1e}", self.value.re, self.error)
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Compensated (Neumaier) sum.
#[derive(Clone, Copy, Default)]
struct Sum {
    s: Complex64,
    c: Complex64,
}

impl Sum {
    fn add(&mut self, v: Complex64) {
        self.s.re = neumaier(self.s.re, v.re, &mut self.c.re);
        self.s.im = neumaier(self.s.im, v.im, &mut self.c.im);
    }

    fn value(self) -> Complex64 {
        self.s + self.c
    }
}

fn neumaier(s: f64, v: f64, c: &mut f64) -> f64 {
    let t = s + v;
    if s.abs() >= v.abs() {
        *c += (s - t) + v;
    } else {
        *c += (v - t) + s;
    }
    t
}

/// `∫ f dx¹…dxⁿ` of the coefficient of a top-degree form over a box.
pub fn integrate_top_form(task: &IntegrationTask) -> Result<Integral, QuadratureError> {
    let form = task.form;
    let dim = form.dim();
    if form.degree() != dim {
        return Err(QuadratureError::NotTopDegree {
            degree: form.degree(),
            dim,
        });
    }
    if !form.coframe().is_coordinate() {
        return Err(QuadratureError::NotCoordinate(form.coframe().name.clone()));
    }
    let coords = task.chart.coords.clone();
    for b in &task.bounds {
        if !coords.contains(&b.axis) {
            return Err(QuadratureError::UnknownAxis(b.axis.clone()));
        }
        b.check()?;
    }
    let axes: Vec<AxisBounds> = coords
        .iter()
        .map(|c| {
            task.bounds
                .iter()
                .find(|b| &b.axis == c)
                .cloned()
                .unwrap_or_else(|| AxisBounds::whole_line(c))
        })
        .collect();
    let f = form.top_coefficient();
    if f.is_zero() {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            nodes: 0,
        });
    }
    let vars: Vec<&str> = coords.iter().map(String::as_str).collect();
    let compiled = Compiled::new(&[f], &vars, &task.fns)?;

    let mut n = task.initial_nodes.max(2);
    let mut prev = tensor_rule(&compiled, task.chart, &axes, n, true)?;
    loop {
        let next_n = 2 * n;
        if next_n > task.max_nodes {
            return Err(QuadratureError::NoConvergence {
                nodes: n,
                diff: f64::NAN,
            });
        }
        let next = tensor_rule(&compiled, task.chart, &axes, next_n, false)?;
        let diff = (next - prev).norm();
        n = next_n;
        if diff < task.tolerance || diff <= 1e-14 * next.norm() {
            return Ok(Integral {
                value: next,
                error: diff,
                nodes: n,
            });
        }
        if 2 * n > task.max_nodes {
            return Err(QuadratureError::NoConvergence { nodes: n, diff });
        }
        prev = next;
    }
}

fn tensor_rule(
    f: &Compiled,
    chart: &Chart,
    axes: &[AxisBounds],
    n: usize,
    check_restrictions: bool,
) -> Result<Complex64, QuadratureError> {
    let (gx, gw) = gauss_legendre(n);
    let d = axes.len();
    // per axis: physical nodes and weights including the Jacobian
    let grids: Vec<(Vec<f64>, Vec<f64>)> = axes
        .iter()
        .map(|ax| {
            let (a, b, sub) = ax.substitution();
            let (h, m) = ((b - a) / 2.0, (a + b) / 2.0);
            gx.iter()
                .zip(&gw)
                .map(|(&t, &w)| {
                    let (x, j) = sub(m + h * t);
                    (x, w * h * j)
                })
                .unzip()
        })
        .collect();
    let outer: usize = n.pow((d - 1) as u32);
    let rows: Vec<Complex64> = (0..outer)
        .into_par_iter()
        .map(|r| {
            let mut pt = vec![0.0; d];
            let mut w0 = 1.0;
            let mut rest = r;
            for k in (0..d - 1).rev() {
                let i = rest % n;
                rest /= n;
                pt[k] = grids[k].0[i];
                w0 *= grids[k].1[i];
            }
            let mut s = Sum::default();
            let last = &grids[d - 1];
            for (x, w) in last.0.iter().zip(&last.1) {
                pt[d - 1] = *x;
                if check_restrictions {
                    let z: Vec<Complex64> = pt.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    chart
                        .admits(&z)
                        .map_err(|reason| QuadratureError::Restriction {
                            point: pt.clone(),
                            reason,
                        })?;
                }
                let v = f.eval_real(&pt).map_err(|source| QuadratureError::Eval {
                    point: pt.clone(),
                    source,
                })?;
                s.add(v[0] * (w0 * w));
            }
            Ok(s.value())
        })
        .collect::<Result<_, QuadratureError>>()?;
    let mut total = Sum::default();
    for r in rows {
        total.add(r);
    }
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Coframe;
    use crate::geometry::{Manifold, Restriction};
    use symexpr::{parse, Expr};

    fn plane(restr: Vec<Restriction>) -> Manifold {
        let mut m = Manifold::new("R2", 2);
        m.add_chart("X", "R2", &["x", "y"], restr).unwrap();
        m
    }

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        for k in 0..10 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k as f64 + 1.0)
            };
            assert!((q - exact).abs() < 1e-14, "x^{}", k);
        }
        let (x, _) = gauss_legendre(64);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn euler_density_over_the_plane() {
        let m = plane(vec![]);
        let cof = Coframe::coordinate(m.chart("X").unwrap());
        let f = DiffForm::from_components(
            &cof,
            2,
            vec![(vec![0, 1], parse("2/(pi*(1+x^2+y^2)^2)").unwrap())],
        )
        .unwrap();
        let r =
            integrate_top_form(&IntegrationTask::new(&f, m.chart("X").unwrap()).tolerance(1e-8))
                .unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-7, "{}", r);
    }

    #[test]
    fn finite_and_half_infinite_boxes() {
        let m = plane(vec![]);
        let cof = Coframe::coordinate(m.chart("X").unwrap());
        let f = DiffForm::from_components(&cof, 2, vec![(vec![0, 1], parse("x*exp(-y)").unwrap())])
            .unwrap();
        let task = IntegrationTask::new(&f, m.chart("X").unwrap())
            .bounds(vec!["x=0..1".parse().unwrap(), "y=0..inf".parse().unwrap()]);
        let r = integrate_top_form(&task).unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-9);
        let zero = DiffForm::zero(&cof, 2);
        assert_eq!(
            integrate_top_form(&IntegrationTask::new(&zero, m.chart("X").unwrap()))
                .unwrap()
                .value
                .re,
            0.0
        );
    }

    #[test]
    fn errors() {
        let m = plane(vec![Restriction::parse("x > 0").unwrap()]);
        let ch = m.chart("X").unwrap();
        let cof = Coframe::coordinate(ch);
        let one = DiffForm::scalar(&cof, Expr::one());
        assert!(matches!(
            integrate_top_form(&IntegrationTask::new(&one, ch)),
            Err(QuadratureError::NotTopDegree { .. })
        ));
        let f = DiffForm::from_components(
            &cof,
            2,
            vec![(vec![0, 1], parse("1/(1+x^2+y^2)^2").unwrap())],
        )
        .unwrap();
        assert!(matches!(
            integrate_top_form(&IntegrationTask::new(&f, ch)),
            Err(QuadratureError::Restriction { .. })
        ));
        assert!("x=1..0".parse::<AxisBounds>().is_err());
        assert!("x=inf..0".parse::<AxisBounds>().is_err());
        assert_eq!(
            "x=inf".parse::<AxisBounds>().unwrap(),
            AxisBounds::whole_line("x")
        );
    }
}
