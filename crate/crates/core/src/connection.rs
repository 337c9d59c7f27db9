//! Bundle connections as matrices of 1-forms, curvature, frame changes,
//! metrics, pullbacks and the Levi-Civita connection.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use symexpr::{Expr, ExprError, Symbol};
use thiserror::Error;

use crate::bundle::{fresh_id, BundleError, VectorBundle};
use crate::forms::{Coframe, DiffForm, FormError};
use crate::geometry::{GeometryError, Manifold};
use crate::matrix::{self, Matrix};

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("connection form ({row},{col}) on frame `{frame}` has degree {degree}, expected 1")]
    NotOneForm {
        frame: String,
        row: usize,
        col: usize,
        degree: usize,
    },
    #[error("entry ({row},{col}) is outside a rank-{rank} matrix")]
    Index { row: usize, col: usize, rank: usize },
    #[error("connection `{conn}` has no forms on frame `{frame}` or any frame linked to it")]
    NoForms { conn: String, frame: String },
    #[error("metric `{0}` is not symmetric")]
    NotSymmetric(String),
    #[error("metric `{0}` is singular")]
    Singular(String),
    #[error("map `{map}` has no expressions from chart `{from}` to chart `{to}`")]
    NoChartPair {
        map: String,
        from: String,
        to: String,
    },
    #[error("map `{map}`: {found} expressions, target dimension {dim}")]
    MapArity {
        map: String,
        dim: usize,
        found: usize,
    },
    #[error("{0}")]
    Bundle(#[from] BundleError),
    #[error("{0}")]
    Form(#[from] FormError),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Expr(#[from] ExprError),
}

pub type FormMatrix = Vec<Vec<DiffForm>>;

/// Connection forms per frame: `forms[j][i] = ω^j_i`, so that
/// `∇e_i = Σ_j e_j ⊗ ω^j_i`.
#[derive(Clone, Debug)]
pub struct BundleConnection {
    id: u64,
    name: String,
    rank: usize,
    forms: Vec<(String, FormMatrix)>,
}

impl BundleConnection {
    pub fn new(name: &str, bundle: &VectorBundle) -> Self {
        BundleConnection {
            id: fresh_id(),
            name: name.into(),
            rank: bundle.rank(),
            forms: Vec::new(),
        }
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

    pub fn frames(&self) -> impl Iterator<Item = &str> {
        self.forms.iter().map(|(f, _)| f.as_str())
    }

    /// Sets every connection form on `frame` to zero in the given coframe.
    pub fn set_flat(&mut self, frame: &str, coframe: &Arc<Coframe>) {
        let z = vec![vec![DiffForm::zero(coframe, 1); self.rank]; self.rank];
        self.store(frame, z);
    }

    fn store(&mut self, frame: &str, m: FormMatrix) {
        self.id = fresh_id();
        match self.forms.iter_mut().find(|(f, _)| f == frame) {
            Some(slot) => slot.1 = m,
            None => self.forms.push((frame.into(), m)),
        }
    }

    /// Sets `ω^row_col` on `frame`; other entries stay (or start as) zero.
    pub fn set_form(
        &mut self,
        frame: &str,
        row: usize,
        col: usize,
        w: DiffForm,
    ) -> Result<(), ConnectionError> {
        if w.degree() != 1 {
            return Err(ConnectionError::NotOneForm {
                frame: frame.into(),
                row,
                col,
                degree: w.degree(),
            });
        }
        if row >= self.rank || col >= self.rank {
            return Err(ConnectionError::Index {
                row,
                col,
                rank: self.rank,
            });
        }
        if self.forms.iter().all(|(f, _)| f != frame) {
            self.set_flat(frame, w.coframe());
        }
        let mut m = self
            .forms
            .iter()
            .find(|(f, _)| f == frame)
            .unwrap()
            .1
            .clone();
        let cur = &m[row][col];
        m[row][col] = if cur.coframe() == w.coframe() {
            w
        } else {
            w.change_coframe(cur.coframe())?
        };
        self.store(frame, m);
        Ok(())
    }

    pub fn set_forms(&mut self, frame: &str, m: FormMatrix) -> Result<(), ConnectionError> {
        for (r, row) in m.iter().enumerate() {
            if row.len() != self.rank {
                return Err(ConnectionError::Index {
                    row: r,
                    col: row.len(),
                    rank: self.rank,
                });
            }
            for (c, w) in row.iter().enumerate() {
                if w.degree() != 1 {
                    return Err(ConnectionError::NotOneForm {
                        frame: frame.into(),
                        row: r,
                        col: c,
                        degree: w.degree(),
                    });
                }
            }
        }
        if m.len() != self.rank {
            return Err(ConnectionError::Index {
                row: m.len(),
                col: 0,
                rank: self.rank,
            });
        }
        self.store(frame, m);
        Ok(())
    }

    pub fn forms(&self, frame: &str) -> Option<&FormMatrix> {
        self.forms.iter().find(|(f, _)| f == frame).map(|(_, m)| m)
    }

    /// Forms on `frame`, transforming stored ones through a registered
    /// frame change when needed.
    pub fn forms_in(
        &self,
        bundle: &VectorBundle,
        frame: &str,
    ) -> Result<FormMatrix, ConnectionError> {
        if let Some(m) = self.forms(frame) {
            return Ok(m.clone());
        }
        for (f, _) in &self.forms {
            if bundle.frame_change(f, frame).is_ok() {
                return change_frame(self, bundle, f, frame);
            }
        }
        Err(ConnectionError::NoForms {
            conn: self.name.clone(),
            frame: frame.into(),
        })
    }

    /// `Ω = dω + ω∧ω` on `frame`.
    pub fn curvature(
        &self,
        bundle: &VectorBundle,
        frame: &str,
    ) -> Result<CurvatureMatrix, ConnectionError> {
        let w = self.forms_in(bundle, frame)?;
        Ok(CurvatureMatrix {
            frame: frame.into(),
            entries: curvature_of(&w)?,
        })
    }
}

/// `Ω^j_i = dω^j_i + Σ_k ω^j_k ∧ ω^k_i`, entries computed in parallel.
pub fn curvature_of(w: &FormMatrix) -> Result<FormMatrix, ConnectionError> {
    let n = w.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |i| (j, i))).collect();
    let out: Vec<DiffForm> = cells
        .par_iter()
        .map(|&(j, i)| -> Result<DiffForm, FormError> {
            let mut acc = w[j][i].d()?;
            for k in 0..n {
                if !w[j][k].is_zero() && !w[k][i].is_zero() {
                    acc = acc.add(&w[j][k].wedge(&w[k][i])?)?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, _>>()?;
    Ok(out.chunks(n).map(|r| r.to_vec()).collect())
}

#[derive(Clone, Debug)]
pub struct CurvatureMatrix {
    pub frame: String,
    pub entries: FormMatrix,
}

impl CurvatureMatrix {
    pub fn new(frame: &str, entries: FormMatrix) -> Result<Self, ConnectionError> {
        if let Some(w) = entries.iter().flatten().find(|w| w.degree() != 2) {
            return Err(FormError::Degree {
                expected: 2,
                found: w.degree(),
            }
            .into());
        }
        Ok(CurvatureMatrix {
            frame: frame.into(),
            entries,
        })
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn coframe(&self) -> &Arc<Coframe> {
        self.entries[0][0].coframe()
    }

    pub fn is_skew(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| {
            (0..n).all(|j| match self.entries[i][j].add(&self.entries[j][i]) {
                Ok(s) => s.is_zero(),
                Err(_) => false,
            })
        })
    }
}

fn scalar_form_product(g: &Matrix, w: &FormMatrix) -> Result<FormMatrix, FormError> {
    let n = g.len();
    let cof = w[0][0].coframe().clone();
    (0..n)
        .map(|j| {
            (0..w[0].len())
                .map(|i| {
                    let mut acc = DiffForm::zero(&cof, w[0][0].degree());
                    for k in 0..n {
                        if !g[j][k].is_zero() && !w[k][i].is_zero() {
                            acc = acc.add(&w[k][i].scale(&g[j][k]))?;
                        }
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect()
}

fn form_scalar_product(w: &FormMatrix, g: &Matrix) -> Result<FormMatrix, FormError> {
    let wt: FormMatrix = matrix::transpose(w);
    let gt = matrix::transpose(g);
    Ok(matrix::transpose(&scalar_form_product(&gt, &wt)?))
}

/// `ω' = g⁻¹dg + g⁻¹ωg` for the registered change `e_to = e_from · g`,
/// returned in the coordinate coframe of the target frame.
pub fn change_frame(
    conn: &BundleConnection,
    bundle: &VectorBundle,
    from: &str,
    to: &str,
) -> Result<FormMatrix, ConnectionError> {
    let w = conn.forms(from).ok_or_else(|| ConnectionError::NoForms {
        conn: conn.name.clone(),
        frame: from.into(),
    })?;
    let cof = w[0][0].coframe().clone();
    let ch = bundle.frame_change(from, to)?;
    let (g, ginv) = bundle.change_in_chart(ch, cof.chart())?;
    let out = transform(w, &g, &ginv)?;
    let target = bundle.coordinate_coframe(to)?;
    let m = bundle.base();
    Ok(out
        .iter()
        .map(|row| {
            row.iter()
                .map(|f| f.change_chart(m, &target))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?)
}

/// `g⁻¹dg + g⁻¹ωg` with `g` written in the coordinates of `ω`'s coframe.
pub fn transform(w: &FormMatrix, g: &Matrix, ginv: &Matrix) -> Result<FormMatrix, ConnectionError> {
    let cof = w[0][0].coframe().clone();
    let dg: FormMatrix = g
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| DiffForm::scalar(&cof, e.clone()).d())
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    let a = scalar_form_product(ginv, &dg)?;
    let b = form_scalar_product(&scalar_form_product(ginv, w)?, g)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| {
            x.iter()
                .zip(y)
                .map(|(p, q)| p.add(q))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?)
}

/// `g⁻¹ Ω g` for a matrix of forms.
pub fn conjugate(
    omega: &FormMatrix,
    g: &Matrix,
    ginv: &Matrix,
) -> Result<FormMatrix, ConnectionError> {
    Ok(form_scalar_product(&scalar_form_product(ginv, omega)?, g)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

/// A symmetric bilinear form `g_ij θ^i ⊗ θ^j` on a coframe.
#[derive(Clone, Debug)]
pub struct Metric {
    pub name: String,
    pub signature: Signature,
    pub coframe: Arc<Coframe>,
    pub g: Matrix,
}

impl Metric {
    pub fn new(
        name: &str,
        signature: Signature,
        coframe: &Arc<Coframe>,
        g: Matrix,
    ) -> Result<Self, ConnectionError> {
        let n = g.len();
        if (0..n).any(|i| (0..n).any(|j| g[i][j] != g[j][i])) {
            return Err(ConnectionError::NotSymmetric(name.into()));
        }
        if matrix::det(&g).is_zero() {
            return Err(ConnectionError::Singular(name.into()));
        }
        Ok(Metric {
            name: name.into(),
            signature,
            coframe: coframe.clone(),
            g,
        })
    }

    /// Components in the coordinate coframe under a linked coframe.
    pub fn in_coordinates(&self) -> Metric {
        match &self.coframe.kind {
            crate::forms::CoframeKind::Abstract { base, inverse, .. } => {
                // θ = L⁻¹ dx, so g_coord = L⁻ᵀ g L⁻¹
                let lt = matrix::transpose(inverse);
                let g = matrix::mul(&matrix::mul(&lt, &self.g), inverse);
                Metric {
                    name: self.name.clone(),
                    signature: self.signature,
                    coframe: base.clone(),
                    g,
                }
            }
            _ => self.clone(),
        }
    }

    /// `g(u, v)` for vectors given in the dual frame of the metric's
    /// coframe.
    pub fn apply(&self, u: &[Expr], v: &[Expr]) -> Expr {
        let mut acc = Expr::zero();
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                if !ui.is_zero() && !vj.is_zero() {
                    acc = acc + self.g[i][j].mul_ref(ui).mul_ref(vj);
                }
            }
        }
        acc
    }

    /// `g` multiplied by a conformal factor.
    pub fn conformal(&self, name: &str, factor: &Expr) -> Metric {
        let g = self
            .g
            .iter()
            .map(|r| r.iter().map(|e| e.mul_ref(factor)).collect())
            .collect();
        Metric {
            name: name.into(),
            signature: self.signature,
            coframe: self.coframe.clone(),
            g,
        }
    }
}

/// Christoffel symbols `Γ[k][i][j] = Γ^k_{ij}` of a metric in coordinate
/// components.
pub fn christoffel(g: &Metric) -> Result<Vec<Vec<Vec<Expr>>>, ConnectionError> {
    let g = g.in_coordinates();
    let n = g.g.len();
    let coords = g.coframe.coords().to_vec();
    let ginv = matrix::inverse(&g.g).ok_or_else(|| ConnectionError::Singular(g.name.clone()))?;
    // ∂_k g_ij
    let dg: Vec<Vec<Vec<Expr>>> = coords
        .iter()
        .map(|x| {
            g.g.iter()
                .map(|r| r.iter().map(|e| e.diff(x)).collect())
                .collect()
        })
        .collect();
    let out: Vec<Vec<Vec<Expr>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut acc = Expr::zero();
                            for l in 0..n {
                                if ginv[k][l].is_zero() {
                                    continue;
                                }
                                let s = dg[i][j][l].add_ref(&dg[j][i][l]).sub_ref(&dg[l][i][j]);
                                if !s.is_zero() {
                                    acc = acc + ginv[k][l].mul_ref(&s);
                                }
                            }
                            acc.mul_ref(&Expr::rational(1, 2))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(out)
}

/// The Levi-Civita connection with `ω^j_i = Σ_k Γ^j_{ki} dx^k`, stored on
/// the coordinate frame of the metric's chart.
pub fn levi_civita(
    g: &Metric,
    bundle: &VectorBundle,
    name: &str,
) -> Result<BundleConnection, ConnectionError> {
    let gc = g.in_coordinates();
    let gamma = christoffel(&gc)?;
    let n = gc.g.len();
    let cof = gc.coframe.clone();
    let frame = cof.chart().to_string();
    bundle.frame(&frame)?;
    let forms: FormMatrix = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| DiffForm::one_form(&cof, (0..n).map(|k| gamma[j][k][i].clone()).collect()))
                .collect()
        })
        .collect();
    let mut conn = BundleConnection::new(name, bundle);
    conn.set_forms(&frame, forms)?;
    Ok(conn)
}

/// Coordinate expressions of a map between manifolds, per chart pair.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    pub name: String,
    pub source: Arc<Manifold>,
    pub target: Arc<Manifold>,
    pub pairs: Vec<(String, String, Vec<Expr>)>,
}

impl SmoothMap {
    pub fn new(name: &str, source: &Arc<Manifold>, target: &Arc<Manifold>) -> Self {
        SmoothMap {
            name: name.into(),
            source: source.clone(),
            target: target.clone(),
            pairs: Vec::new(),
        }
    }

    pub fn with(mut self, from: &str, to: &str, exprs: Vec<Expr>) -> Result<Self, ConnectionError> {
        self.source.chart(from)?;
        self.target.chart(to)?;
        if exprs.len() != self.target.dim() {
            return Err(ConnectionError::MapArity {
                map: self.name.clone(),
                dim: self.target.dim(),
                found: exprs.len(),
            });
        }
        self.pairs.push((from.into(), to.into(), exprs));
        Ok(self)
    }

    pub fn exprs(&self, from: &str, to: &str) -> Result<&[Expr], ConnectionError> {
        self.pairs
            .iter()
            .find(|(a, b, _)| a == from && b == to)
            .map(|(_, _, e)| e.as_slice())
            .ok_or_else(|| ConnectionError::NoChartPair {
                map: self.name.clone(),
                from: from.into(),
                to: to.into(),
            })
    }

    /// Samples agreement of two chart pairs related by transitions on both
    /// sides: `ψ ∘ f_{a→b} = f_{a'→b'} ∘ φ` as expressions in `a`.
    pub fn check_pairs(&self) -> Result<(), ConnectionError> {
        for (a, b, f) in &self.pairs {
            for (a2, b2, f2) in &self.pairs {
                if (a, b) == (a2, b2) {
                    continue;
                }
                let (Ok(ta), Ok(tb)) =
                    (self.source.transition(a, a2), self.target.transition(b, b2))
                else {
                    continue;
                };
                let tgt = self.target.chart(b)?;
                let tgt2 = self.source.chart(a2)?;
                let along: HashMap<Symbol, Expr> = tgt
                    .coords
                    .iter()
                    .map(|c| Symbol::from(c.as_str()))
                    .zip(f.iter().cloned())
                    .collect();
                let via_target: Vec<Expr> = tb
                    .exprs
                    .iter()
                    .map(|e| e.subs(&along))
                    .collect::<Result<_, _>>()?;
                let back: HashMap<Symbol, Expr> = tgt2
                    .coords
                    .iter()
                    .map(|c| Symbol::from(c.as_str()))
                    .zip(ta.exprs.iter().cloned())
                    .collect();
                let via_source: Vec<Expr> =
                    f2.iter().map(|e| e.subs(&back)).collect::<Result<_, _>>()?;
                if via_target
                    .iter()
                    .zip(&via_source)
                    .any(|(x, y)| !crate::same(x, y))
                {
                    return Err(ConnectionError::NoChartPair {
                        map: self.name.clone(),
                        from: a2.clone(),
                        to: b2.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// `(f*h)_ij = Σ_ab h_ab(f) ∂_i f^a ∂_j f^b` on the coordinate coframe of
/// `from`.
pub fn pullback_metric(
    h: &Metric,
    f: &SmoothMap,
    from: &str,
    name: &str,
) -> Result<Metric, ConnectionError> {
    let h = h.in_coordinates();
    let to = h.coframe.chart().to_string();
    let exprs = f.exprs(from, &to)?;
    let src = f.source.chart(from)?;
    let tgt = f.target.chart(&to)?;
    let map: HashMap<Symbol, Expr> = tgt
        .coords
        .iter()
        .map(|c| Symbol::from(c.as_str()))
        .zip(exprs.iter().cloned())
        .collect();
    let hf: Matrix =
        h.g.iter()
            .map(|r| r.iter().map(|e| e.subs(&map)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
    let jac: Matrix = exprs
        .iter()
        .map(|y| src.coords.iter().map(|x| y.diff(x)).collect())
        .collect();
    let g = matrix::mul(&matrix::mul(&matrix::transpose(&jac), &hf), &jac);
    let g: Matrix = g
        .iter()
        .map(|r| r.iter().map(|e| e.trig_reduce()).collect())
        .collect();
    Metric::new(name, h.signature, &Coframe::coordinate(src), g)
}
