//! Vector bundles described through local frames, frame changes and
//! sections given by per-frame components.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use symexpr::{Expr, ExprError, Symbol};
use thiserror::Error;

use crate::forms::{Coframe, FormError};
use crate::geometry::{GeometryError, Manifold, Point};
use crate::matrix::{self, Matrix};

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("`{0}` is already declared")]
    Duplicate(String),
    #[error("frame change {from} -> {to} is singular")]
    Singular { from: String, to: String },
    #[error("frame change {from} -> {to} must be {rank}x{rank}")]
    Shape {
        from: String,
        to: String,
        rank: usize,
    },
    #[error("no frame change from `{from}` to `{to}`")]
    NoFrameChange { from: String, to: String },
    #[error("section `{section}` has no components convertible to frame `{frame}`")]
    NotConvertible { section: String, frame: String },
    #[error("section `{section}` does not agree with its `{frame}` components on the overlap")]
    Inconsistent { section: String, frame: String },
    #[error("point `{point}` is not in the domain of frame `{frame}`")]
    OutsideDomain { point: String, frame: String },
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Form(#[from] FormError),
    #[error("{0}")]
    Expr(#[from] ExprError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Debug)]
pub struct LocalFrame {
    pub name: String,
    pub domain: String,
    /// Chart in whose coordinates components and connection forms are
    /// written.
    pub chart: String,
    /// For tangent-bundle frames given by vector fields: `link[j][i]` is
    /// the `j`-th coordinate component of the `i`-th vector.
    pub vectors: Option<Matrix>,
}

/// `e_to = e_from · g`, so components transform as `c_to = g⁻¹ c_from`.
#[derive(Clone, Debug)]
pub struct FrameChange {
    pub from: String,
    pub to: String,
    pub domain: String,
    pub chart: String,
    pub matrix: Matrix,
    pub inverse: Matrix,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Clone, Debug)]
pub struct VectorBundle {
    id: u64,
    name: String,
    rank: usize,
    field: Field,
    base: Arc<Manifold>,
    tangent: bool,
    frames: Vec<LocalFrame>,
    changes: Vec<FrameChange>,
}

impl VectorBundle {
    pub fn new(name: &str, rank: usize, field: Field, base: &Arc<Manifold>) -> Self {
        VectorBundle {
            id: fresh_id(),
            name: name.to_string(),
            rank,
            field,
            base: base.clone(),
            tangent: false,
            frames: Vec::new(),
            changes: Vec::new(),
        }
    }

    /// The tangent bundle with one coordinate frame per chart (named after
    /// the chart) and Jacobian frame changes for every transition.
    pub fn tangent(name: &str, base: &Arc<Manifold>) -> Result<Self, BundleError> {
        let mut b = VectorBundle::new(name, base.dim(), Field::Real, base);
        b.tangent = true;
        for c in base.charts() {
            b.frames.push(LocalFrame {
                name: c.name.clone(),
                domain: c.domain.clone(),
                chart: c.name.clone(),
                vectors: None,
            });
        }
        for t in base.transitions() {
            // ∂/∂x^i = Σ_j ∂y^j/∂x^i ∂/∂y^j, i.e. e_from = e_to · J
            let j = base.jacobian(&t.from, &t.to)?;
            let inv = matrix::inverse(&j).ok_or_else(|| BundleError::Singular {
                from: t.from.clone(),
                to: t.to.clone(),
            })?;
            b.changes.push(FrameChange {
                from: t.to.clone(),
                to: t.from.clone(),
                domain: t.domain.clone(),
                chart: t.from.clone(),
                matrix: j,
                inverse: inv,
            });
        }
        Ok(b)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn base(&self) -> &Arc<Manifold> {
        &self.base
    }

    pub fn is_tangent(&self) -> bool {
        self.tangent
    }

    pub fn frames(&self) -> &[LocalFrame] {
        &self.frames
    }

    pub fn frame(&self, name: &str) -> Result<&LocalFrame, BundleError> {
        self.frames
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| BundleError::UnknownFrame(name.to_string()))
    }

    pub fn add_frame(
        &mut self,
        name: &str,
        domain: &str,
        chart: &str,
    ) -> Result<&LocalFrame, BundleError> {
        if self.frames.iter().any(|f| f.name == name) {
            return Err(BundleError::Duplicate(name.to_string()));
        }
        let ch = self.base.chart(chart)?;
        if !self.base.is_subset(domain, &ch.domain) {
            return Err(GeometryError::NotContained {
                sub: domain.to_string(),
                sup: ch.domain.clone(),
            }
            .into());
        }
        self.frames.push(LocalFrame {
            name: name.into(),
            domain: domain.into(),
            chart: chart.into(),
            vectors: None,
        });
        Ok(self.frames.last().unwrap())
    }

    /// A tangent frame given by vector fields in the coordinate frame of
    /// `chart`; registers the change from that coordinate frame.
    pub fn add_vector_frame(
        &mut self,
        name: &str,
        chart: &str,
        vectors: Matrix,
    ) -> Result<&LocalFrame, BundleError> {
        let domain = self.base.chart(chart)?.domain.clone();
        self.add_frame(name, &domain, chart)?;
        self.set_frame_change(chart, name, &domain, chart, vectors.clone())?;
        self.frames.last_mut().unwrap().vectors = Some(vectors);
        Ok(self.frames.last().unwrap())
    }

    /// Coframe in which connection and curvature forms of `frame` are
    /// written: the coordinate coframe of its chart.
    pub fn coordinate_coframe(&self, frame: &str) -> Result<Arc<Coframe>, BundleError> {
        let f = self.frame(frame)?;
        Ok(Coframe::coordinate(self.base.chart(&f.chart)?))
    }

    /// The coframe dual to a vector frame of the tangent bundle.
    pub fn dual_coframe(&self, frame: &str, symbol: &str) -> Result<Arc<Coframe>, BundleError> {
        let f = self.frame(frame)?;
        let base = Coframe::coordinate(self.base.chart(&f.chart)?);
        match &f.vectors {
            None => Ok(base),
            Some(v) => Ok(Coframe::linked(
                &f.name,
                symbol,
                self.base.start_index(),
                &base,
                v.clone(),
            )?),
        }
    }

    /// Registers `e_to = e_from · g` with `g` written in `chart`, and the
    /// inverse change.
    pub fn set_frame_change(
        &mut self,
        from: &str,
        to: &str,
        domain: &str,
        chart: &str,
        g: Matrix,
    ) -> Result<&FrameChange, BundleError> {
        self.frame(from)?;
        self.frame(to)?;
        self.base.chart(chart)?;
        if g.len() != self.rank || g.iter().any(|r| r.len() != self.rank) {
            return Err(BundleError::Shape {
                from: from.into(),
                to: to.into(),
                rank: self.rank,
            });
        }
        let inv = matrix::inverse(&g).ok_or_else(|| BundleError::Singular {
            from: from.into(),
            to: to.into(),
        })?;
        self.changes
            .retain(|c| !((c.from == from && c.to == to) || (c.from == to && c.to == from)));
        self.changes.push(FrameChange {
            from: to.into(),
            to: from.into(),
            domain: domain.into(),
            chart: chart.into(),
            matrix: inv.clone(),
            inverse: g.clone(),
        });
        self.changes.push(FrameChange {
            from: from.into(),
            to: to.into(),
            domain: domain.into(),
            chart: chart.into(),
            matrix: g,
            inverse: inv,
        });
        Ok(self.changes.last().unwrap())
    }

    pub fn frame_change(&self, from: &str, to: &str) -> Result<&FrameChange, BundleError> {
        self.changes
            .iter()
            .find(|c| c.from == from && c.to == to)
            .ok_or_else(|| BundleError::NoFrameChange {
                from: from.into(),
                to: to.into(),
            })
    }

    pub fn frame_changes(&self) -> &[FrameChange] {
        &self.changes
    }

    /// The change matrix re-expressed in another chart.
    pub fn change_in_chart(
        &self,
        c: &FrameChange,
        chart: &str,
    ) -> Result<(Matrix, Matrix), BundleError> {
        let conv = |m: &Matrix| -> Result<Matrix, GeometryError> {
            m.iter()
                .map(|r| {
                    r.iter()
                        .map(|e| self.base.express(e, &c.chart, chart))
                        .collect()
                })
                .collect()
        };
        Ok((conv(&c.matrix)?, conv(&c.inverse)?))
    }

    /// Determinant of a frame change as an expression in `chart`.
    pub fn change_determinant(
        &self,
        from: &str,
        to: &str,
        chart: &str,
    ) -> Result<Expr, BundleError> {
        let c = self.frame_change(from, to)?;
        Ok(self
            .base
            .express(&matrix::det(&c.matrix), &c.chart, chart)?)
    }

    /// Components of `s` in `frame`, written in that frame's chart.
    pub fn section_components(&self, s: &Section, frame: &str) -> Result<Vec<Expr>, BundleError> {
        if let Some(c) = s.get(frame) {
            return Ok(c.to_vec());
        }
        let target = self.frame(frame)?;
        for (f, comps) in &s.comps {
            let Ok(ch) = self.frame_change(f, frame) else {
                continue;
            };
            let src = self.frame(f)?;
            let moved: Vec<Expr> = comps
                .iter()
                .map(|e| self.base.express(e, &src.chart, &ch.chart))
                .collect::<Result<_, _>>()?;
            let out: Vec<Expr> = ch
                .inverse
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&moved)
                        .map(|(a, b)| a.mul_ref(b))
                        .sum::<Expr>()
                })
                .collect();
            return out
                .iter()
                .map(|e| Ok(self.base.express(e, &ch.chart, &target.chart)?))
                .collect();
        }
        Err(BundleError::NotConvertible {
            section: s.name.clone(),
            frame: frame.into(),
        })
    }

    /// Extends `s` to the whole domain of `frame` from its values on
    /// `overlap`. Only canonical well-definedness of the converted
    /// components is required; no pointwise pole check is made.
    pub fn continue_section(
        &self,
        s: &Section,
        frame: &str,
        overlap: &str,
    ) -> Result<Section, BundleError> {
        let f = self.frame(frame)?;
        if !self.base.is_subset(overlap, &f.domain) {
            return Err(GeometryError::NotContained {
                sub: overlap.into(),
                sup: f.domain.clone(),
            }
            .into());
        }
        let comps = self.section_components(s, frame)?;
        let mut out = s.clone();
        out.set(frame, comps);
        out.domain = self.base.name().to_string();
        Ok(out)
    }

    /// Checks every pair of stored frames linked by a frame change.
    pub fn check_section(&self, s: &Section) -> Result<(), BundleError> {
        for (f, comps) in &s.comps {
            let one = Section {
                name: s.name.clone(),
                domain: s.domain.clone(),
                comps: vec![(f.clone(), comps.clone())],
            };
            for (g, other) in &s.comps {
                if f == g || self.frame_change(f, g).is_err() {
                    continue;
                }
                let conv = self.section_components(&one, g)?;
                if conv.iter().zip(other).any(|(a, b)| !crate::same(a, b)) {
                    return Err(BundleError::Inconsistent {
                        section: s.name.clone(),
                        frame: g.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The vector `s(p)` in the fibre over `p`, in `frame`.
    pub fn section_at(
        &self,
        s: &Section,
        p: &Point,
        frame: &str,
    ) -> Result<FiberVector, BundleError> {
        let f = self.frame(frame)?;
        let pc = self.base.chart(&p.chart)?;
        if !self.base.is_subset(&pc.domain, &f.domain)
            && self.base.transition(&p.chart, &f.chart).is_err()
        {
            return Err(BundleError::OutsideDomain {
                point: p.name.clone(),
                frame: frame.into(),
            });
        }
        let b: HashMap<Symbol, Expr> =
            p.bindings(&self.base, &f.chart)
                .map_err(|_| BundleError::OutsideDomain {
                    point: p.name.clone(),
                    frame: frame.into(),
                })?;
        let comps = self.section_components(s, frame)?;
        let vals = comps
            .iter()
            .map(|e| e.subs(&b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FiberVector {
            point: p.name.clone(),
            frame: frame.into(),
            comps: vals,
        })
    }
}

/// A section given by component vectors in some frames.
#[derive(Clone, Debug)]
pub struct Section {
    pub name: String,
    pub domain: String,
    pub comps: Vec<(String, Vec<Expr>)>,
}

impl Section {
    pub fn new(name: &str, domain: &str) -> Self {
        Section {
            name: name.into(),
            domain: domain.into(),
            comps: Vec::new(),
        }
    }

    pub fn with(mut self, frame: &str, comps: Vec<Expr>) -> Self {
        self.set(frame, comps);
        self
    }

    pub fn set(&mut self, frame: &str, comps: Vec<Expr>) {
        match self.comps.iter_mut().find(|(f, _)| f == frame) {
            Some(slot) => slot.1 = comps,
            None => self.comps.push((frame.into(), comps)),
        }
    }

    pub fn get(&self, frame: &str) -> Option<&[Expr]> {
        self.comps
            .iter()
            .find(|(f, _)| f == frame)
            .map(|(_, c)| c.as_slice())
    }

    /// Sum over the frames where both sections have components.
    pub fn add(&self, other: &Section, name: &str) -> Section {
        let mut out = Section::new(name, &self.domain);
        for (f, a) in &self.comps {
            if let Some(b) = other.get(f) {
                out.set(f, a.iter().zip(b).map(|(x, y)| x.add_ref(y)).collect());
            }
        }
        out
    }

    /// Multiplication by a scalar field written in each frame's chart.
    pub fn scale(
        &self,
        bundle: &VectorBundle,
        f: &crate::geometry::ScalarField,
        name: &str,
    ) -> Result<Section, BundleError> {
        let mut out = Section::new(name, &self.domain);
        for (fr, a) in &self.comps {
            let chart = &bundle.frame(fr)?.chart;
            let s = f.expr_in(bundle.base(), chart)?;
            out.set(fr, a.iter().map(|x| x.mul_ref(&s)).collect());
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberVector {
    pub point: String,
    pub frame: String,
    pub comps: Vec<Expr>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use symexpr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    /// The Möbius line bundle over RP¹ with the change `e_U = e_V · (u)`.
    pub(crate) fn mobius() -> VectorBundle {
        let mut m = Manifold::new("RP1", 1);
        m.open_subset("U", &[]).unwrap();
        m.open_subset("V", &[]).unwrap();
        m.declare_union("RP1", &["U", "V"]).unwrap();
        m.declare_intersection("W", "U", "V").unwrap();
        m.add_chart("cu", "U", &["u"], vec![]).unwrap();
        m.add_chart("cv", "V", &["v"], vec![]).unwrap();
        m.add_transition("cu", "cv", "W", vec![p("1/u")], vec![p("1/v")])
            .unwrap();
        let m = m.freeze();
        let mut e = VectorBundle::new("E", 1, Field::Real, &m);
        e.add_frame("eU", "U", "cu").unwrap();
        e.add_frame("eV", "V", "cv").unwrap();
        e.set_frame_change("eV", "eU", "W", "cu", vec![vec![p("u")]])
            .unwrap();
        e
    }

    #[test]
    fn mobius_change_and_inverse() {
        let e = mobius();
        assert_eq!(e.frame_change("eU", "eV").unwrap().matrix[0][0], p("1/u"));
        assert_eq!(e.change_determinant("eV", "eU", "cu").unwrap(), p("u"));
        assert_eq!(e.change_determinant("eV", "eU", "cv").unwrap(), p("1/v"));
    }

    #[test]
    fn mobius_sections() {
        let e = mobius();
        let sigma = Section::new("sigma", "U").with("eU", vec![p("(1-u)/(1+u^2)")]);
        assert_eq!(
            e.section_components(&sigma, "eV").unwrap(),
            vec![p("(v-1)/(v^2+1)")]
        );
        let sigma = e.continue_section(&sigma, "eV", "W").unwrap();
        e.check_section(&sigma).unwrap();
        let tau = Section::new("tau", "V").with("eV", vec![p("(3-v^2)/(1+v^4)")]);
        assert_eq!(
            e.section_components(&tau, "eU").unwrap(),
            vec![p("(3*u^3-u)/(u^4+1)")]
        );
        let tau = e.continue_section(&tau, "eU", "W").unwrap();
        let pt = e.base().point("p", "cu", vec![Expr::int(-1)]).unwrap();
        assert_eq!(
            e.section_at(&sigma, &pt, "eU").unwrap().comps,
            vec![Expr::one()]
        );
        assert_eq!(
            e.section_at(&tau, &pt, "eU").unwrap().comps,
            vec![Expr::int(-1)]
        );
        let s = sigma.add(&tau, "s");
        assert_eq!(
            e.section_at(&s, &pt, "eU").unwrap().comps,
            vec![Expr::zero()]
        );
        // the same point seen from the other chart
        assert_eq!(
            e.section_at(&s, &pt, "eV").unwrap().comps,
            vec![Expr::zero()]
        );
    }

    #[test]
    fn singular_change_is_rejected() {
        let mut e = mobius();
        let r = e.set_frame_change("eV", "eU", "W", "cu", vec![vec![Expr::zero()]]);
        assert!(matches!(r, Err(BundleError::Singular { .. })));
    }

    #[test]
    fn zero_section_stays_zero() {
        let e = mobius();
        let z = Section::new("0", "U").with("eU", vec![Expr::zero()]);
        assert_eq!(e.section_components(&z, "eV").unwrap(), vec![Expr::zero()]);
    }
}
