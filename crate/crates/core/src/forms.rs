//! Differential forms with sparse components in a coframe, and mixed forms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};
use symexpr::{Expr, ExprError, Symbol};
use thiserror::Error;

use crate::geometry::{Chart, GeometryError, Manifold};
use crate::matrix::{self, Matrix};

#[derive(Debug, Error)]
pub enum FormError {
    #[error("forms live on coframes `{0}` and `{1}` with no linking matrix between them")]
    NoCommonCoframe(String, String),
    #[error("coframe `{0}` has no linking matrix to a coordinate coframe")]
    NotCoordinate(String),
    #[error("linking matrix of `{0}` is singular")]
    Singular(String),
    #[error("expected a {expected}-form, got a {found}-form")]
    Degree { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A strictly increasing index tuple, stored as a bit set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Blade(pub u32);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    pub fn single(i: usize) -> Blade {
        Blade(1 << i)
    }

    pub fn from_indices(ix: &[usize]) -> Blade {
        Blade(ix.iter().fold(0, |b, &i| b | (1 << i)))
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|i| self.0 & (1 << i) != 0).collect()
    }

    /// `e_a ∧ e_b = sign · e_{a∪b}`, or `None` when they share an index.
    pub fn wedge(a: Blade, b: Blade) -> Option<(Blade, bool)> {
        if a.0 & b.0 != 0 {
            return None;
        }
        // each index of b passes over the indices of a above it
        let mut swaps = 0;
        let mut rest = b.0;
        while rest != 0 {
            let j = rest.trailing_zeros();
            swaps += (a.0 >> j).count_ones();
            rest &= rest - 1;
        }
        Some((Blade(a.0 | b.0), swaps % 2 == 1))
    }
}

impl Ord for Blade {
    // lexicographic order of the index tuples
    fn cmp(&self, other: &Self) -> Ordering {
        (self.degree(), other.0.reverse_bits()).cmp(&(other.degree(), self.0.reverse_bits()))
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sorts an index tuple; `None` on a repeated index, else the blade and
/// whether the permutation was odd.
pub fn sort_indices(ix: &[usize]) -> Option<(Blade, bool)> {
    let mut v = ix.to_vec();
    let mut odd = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((Blade::from_indices(&v), odd))
}

#[derive(Clone, Debug)]
pub enum CoframeKind {
    /// `dx^i` of a chart.
    Coordinate { chart: String, coords: Vec<String> },
    /// `θ^i` with `dx^j = Σ_i link[j][i] θ^i` over a coordinate coframe; the
    /// dual vectors are `e_i = Σ_j link[j][i] ∂_j`.
    Abstract {
        base: Arc<Coframe>,
        link: Matrix,
        inverse: Matrix,
    },
}

#[derive(Clone, Debug)]
pub struct Coframe {
    pub name: String,
    pub symbols: Vec<String>,
    pub latex: Vec<String>,
    pub kind: CoframeKind,
}

impl PartialEq for Coframe {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Coframe {
    pub fn coordinate(chart: &Chart) -> Arc<Coframe> {
        Arc::new(Coframe {
            name: chart.name.clone(),
            symbols: chart.coords.iter().map(|c| format!("d{}", c)).collect(),
            latex: chart
                .coords
                .iter()
                .map(|c| format!("\\mathrm{{d}} {}", Expr::var(c).to_latex()))
                .collect(),
            kind: CoframeKind::Coordinate {
                chart: chart.name.clone(),
                coords: chart.coords.clone(),
            },
        })
    }

    /// A coframe dual to the vector frame whose `i`-th vector has
    /// components `link[j][i]` in the coordinate frame of `base`.
    pub fn linked(
        name: &str,
        symbol: &str,
        start: usize,
        base: &Arc<Coframe>,
        link: Matrix,
    ) -> Result<Arc<Coframe>, FormError> {
        if !matches!(base.kind, CoframeKind::Coordinate { .. }) {
            return Err(FormError::NotCoordinate(base.name.clone()));
        }
        let inverse =
            matrix::inverse(&link).ok_or_else(|| FormError::Singular(name.to_string()))?;
        let n = link.len();
        Ok(Arc::new(Coframe {
            name: name.to_string(),
            symbols: (0..n)
                .map(|i| format!("{}^{}", symbol, i + start))
                .collect(),
            latex: (0..n)
                .map(|i| format!("{}^{{{}}}", latex_symbol(symbol), i + start))
                .collect(),
            kind: CoframeKind::Abstract {
                base: base.clone(),
                link,
                inverse,
            },
        }))
    }

    pub fn dim(&self) -> usize {
        self.symbols.len()
    }

    pub fn chart(&self) -> &str {
        match &self.kind {
            CoframeKind::Coordinate { chart, .. } => chart,
            CoframeKind::Abstract { base, .. } => base.chart(),
        }
    }

    pub fn coords(&self) -> &[String] {
        match &self.kind {
            CoframeKind::Coordinate { coords, .. } => coords,
            CoframeKind::Abstract { base, .. } => base.coords(),
        }
    }

    pub fn is_coordinate(&self) -> bool {
        matches!(self.kind, CoframeKind::Coordinate { .. })
    }

    pub fn base(&self) -> Option<&Arc<Coframe>> {
        match &self.kind {
            CoframeKind::Abstract { base, .. } => Some(base),
            _ => None,
        }
    }
}

fn latex_symbol(s: &str) -> String {
    match s {
        "e" => "e".into(),
        "eps" | "epsilon" | "varepsilon" => "\\varepsilon".into(),
        "theta" | "omega" | "eta" => format!("\\{}", s),
        other => other.to_string(),
    }
}

/// A `k`-form: sparse components on strictly increasing index tuples of a
/// coframe.
#[derive(Clone, Debug)]
pub struct DiffForm {
    degree: usize,
    coframe: Arc<Coframe>,
    comps: BTreeMap<Blade, Expr>,
}

impl PartialEq for DiffForm {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.coframe == other.coframe && self.comps == other.comps
    }
}

impl DiffForm {
    pub fn zero(coframe: &Arc<Coframe>, degree: usize) -> Self {
        DiffForm {
            degree,
            coframe: coframe.clone(),
            comps: BTreeMap::new(),
        }
    }

    pub fn scalar(coframe: &Arc<Coframe>, f: Expr) -> Self {
        Self::zero(coframe, 0).with_comp(Blade::EMPTY, f)
    }

    /// `θ^i`.
    pub fn basis(coframe: &Arc<Coframe>, i: usize) -> Self {
        Self::zero(coframe, 1).with_comp(Blade::single(i), Expr::one())
    }

    /// Builds from arbitrary index tuples, antisymmetrising and summing.
    pub fn from_components(
        coframe: &Arc<Coframe>,
        degree: usize,
        comps: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Result<Self, FormError> {
        let mut out = Self::zero(coframe, degree);
        for (ix, e) in comps {
            if ix.len() != degree {
                return Err(FormError::Degree {
                    expected: degree,
                    found: ix.len(),
                });
            }
            if let Some(&i) = ix.iter().find(|&&i| i >= coframe.dim()) {
                return Err(FormError::Index {
                    index: i,
                    dim: coframe.dim(),
                });
            }
            if let Some((b, odd)) = sort_indices(&ix) {
                out.accumulate(b, if odd { -e } else { e });
            }
        }
        Ok(out)
    }

    /// A 1-form from its components.
    pub fn one_form(coframe: &Arc<Coframe>, comps: Vec<Expr>) -> Self {
        let mut out = Self::zero(coframe, 1);
        for (i, e) in comps.into_iter().enumerate() {
            out.accumulate(Blade::single(i), e);
        }
        out
    }

    fn with_comp(mut self, b: Blade, e: Expr) -> Self {
        self.accumulate(b, e);
        self
    }

    fn accumulate(&mut self, b: Blade, e: Expr) {
        if e.is_zero() || self.degree > self.dim() {
            return;
        }
        match self.comps.get_mut(&b) {
            Some(slot) => {
                *slot = slot.add_ref(&e);
                if slot.is_zero() {
                    self.comps.remove(&b);
                }
            }
            None => {
                self.comps.insert(b, e);
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.coframe.dim()
    }

    pub fn coframe(&self) -> &Arc<Coframe> {
        &self.coframe
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Nonzero components on increasing tuples, in lexicographic order.
    pub fn components(&self) -> impl Iterator<Item = (Blade, &Expr)> {
        self.comps.iter().map(|(b, e)| (*b, e))
    }

    /// Component on any index tuple, using antisymmetry.
    pub fn comp(&self, ix: &[usize]) -> Expr {
        if ix.len() != self.degree {
            return Expr::zero();
        }
        match sort_indices(ix) {
            None => Expr::zero(),
            Some((b, odd)) => {
                let e = self.comps.get(&b).cloned().unwrap_or_else(Expr::zero);
                if odd {
                    -e
                } else {
                    e
                }
            }
        }
    }

    /// The coefficient of a top-degree form.
    pub fn top_coefficient(&self) -> Expr {
        self.comps
            .values()
            .next()
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        let mut out = Self::zero(&self.coframe, self.degree);
        for (b, e) in &self.comps {
            out.accumulate(*b, f(e));
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&Expr) -> Result<Expr, ExprError>) -> Result<Self, ExprError> {
        let mut out = Self::zero(&self.coframe, self.degree);
        for (b, e) in &self.comps {
            out.accumulate(*b, f(e)?);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Expr) -> Self {
        if c.is_zero() {
            return Self::zero(&self.coframe, self.degree);
        }
        self.map(|e| e.mul_ref(c))
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e.clone())
    }

    /// Brings `other` onto this form's coframe, or both onto `other`'s.
    fn align<'a>(&'a self, other: &'a DiffForm) -> Result<(Self, Self), FormError> {
        if self.coframe == other.coframe {
            return Ok((self.clone(), other.clone()));
        }
        if let Ok(b) = other.change_coframe(&self.coframe) {
            return Ok((self.clone(), b));
        }
        if let Ok(a) = self.change_coframe(&other.coframe) {
            return Ok((a, other.clone()));
        }
        Err(FormError::NoCommonCoframe(
            self.coframe.name.clone(),
            other.coframe.name.clone(),
        ))
    }

    pub fn add(&self, other: &DiffForm) -> Result<Self, FormError> {
        if self.degree != other.degree {
            return Err(FormError::Degree {
                expected: self.degree,
                found: other.degree,
            });
        }
        let (mut a, b) = self.align(other)?;
        for (bl, e) in b.comps {
            a.accumulate(bl, e);
        }
        Ok(a)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<Self, FormError> {
        self.add(&other.neg())
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<Self, FormError> {
        let (a, b) = self.align(other)?;
        Ok(a.wedge_same(&b))
    }

    fn wedge_same(&self, other: &DiffForm) -> Self {
        let mut out = Self::zero(&self.coframe, self.degree + other.degree);
        if out.degree > self.dim() {
            return out;
        }
        for (ba, ea) in &self.comps {
            for (bb, eb) in &other.comps {
                if let Some((b, odd)) = Blade::wedge(*ba, *bb) {
                    let p = ea.mul_ref(eb);
                    out.accumulate(b, if odd { -p } else { p });
                }
            }
        }
        out
    }

    /// Exterior derivative, computed in the underlying coordinate coframe
    /// and returned in this form's coframe.
    pub fn d(&self) -> Result<Self, FormError> {
        if self.coframe.is_coordinate() {
            return Ok(self.d_coordinate());
        }
        let base = self
            .coframe
            .base()
            .cloned()
            .ok_or_else(|| FormError::NotCoordinate(self.coframe.name.clone()))?;
        self.change_coframe(&base)?
            .d_coordinate()
            .change_coframe(&self.coframe)
    }

    fn d_coordinate(&self) -> Self {
        let coords = self.coframe.coords().to_vec();
        let mut out = Self::zero(&self.coframe, self.degree + 1);
        if out.degree > self.dim() {
            return out;
        }
        for (b, e) in &self.comps {
            for (j, x) in coords.iter().enumerate() {
                if let Some((nb, odd)) = Blade::wedge(Blade::single(j), *b) {
                    let de = e.diff(x);
                    out.accumulate(nb, if odd { -de } else { de });
                }
            }
        }
        out
    }

    /// Substitutes each basis covector by the given 1-form (all on a common
    /// coframe) and each coefficient through `f`.
    pub fn substitute_basis(
        &self,
        images: &[DiffForm],
        f: impl Fn(&Expr) -> Result<Expr, ExprError>,
    ) -> Result<Self, FormError> {
        let target = images
            .first()
            .map(|d| d.coframe.clone())
            .ok_or_else(|| FormError::NotCoordinate(self.coframe.name.clone()))?;
        let mut out = Self::zero(&target, self.degree);
        let mut cache: HashMap<Blade, DiffForm> = HashMap::new();
        for (b, e) in &self.comps {
            let wedge = blade_image(*b, images, &target, &mut cache);
            let c = f(e)?;
            for (nb, x) in wedge.comps {
                out.accumulate(nb, c.mul_ref(&x));
            }
        }
        Ok(out)
    }

    /// Re-expresses the form in another coframe linked to this one through
    /// linking matrices.
    pub fn change_coframe(&self, target: &Arc<Coframe>) -> Result<Self, FormError> {
        if self.coframe == *target {
            return Ok(self.clone());
        }
        let cur = &self.coframe;
        match (&cur.kind, &target.kind) {
            (CoframeKind::Abstract { base, inverse, .. }, _) if **base == **target => {
                // θ^i = Σ_j inverse[i][j] dx^j
                let images: Vec<DiffForm> = inverse
                    .iter()
                    .map(|row| DiffForm::one_form(target, row.clone()))
                    .collect();
                self.substitute_basis(&images, |e| Ok(e.clone()))
            }
            (_, CoframeKind::Abstract { base, link, .. }) if **base == **cur => {
                let images: Vec<DiffForm> = link
                    .iter()
                    .map(|row| DiffForm::one_form(target, row.clone()))
                    .collect();
                self.substitute_basis(&images, |e| Ok(e.clone()))
            }
            (CoframeKind::Abstract { base: b1, .. }, CoframeKind::Abstract { base: b2, .. })
                if b1 == b2 =>
            {
                self.change_coframe(b1)?.change_coframe(target)
            }
            _ => Err(FormError::NoCommonCoframe(
                cur.name.clone(),
                target.name.clone(),
            )),
        }
    }

    /// Pulls the form back along the chart transition into the coordinate
    /// coframe of `target` (or into `target` itself when it is linked to
    /// such a coframe).
    pub fn change_chart(&self, m: &Manifold, target: &Arc<Coframe>) -> Result<Self, FormError> {
        if self.coframe.chart() == target.chart() {
            return self.change_coframe(target);
        }
        let src = match self.coframe.base() {
            Some(b) => self.change_coframe(&b.clone())?,
            None => self.clone(),
        };
        let tgt_base = target.base().cloned().unwrap_or_else(|| target.clone());
        let (from, to) = (
            src.coframe.chart().to_string(),
            tgt_base.chart().to_string(),
        );
        let tr = m.transition(&to, &from)?;
        let to_chart = m.chart(&to)?;
        let images: Vec<DiffForm> = tr
            .exprs
            .iter()
            .map(|y| {
                DiffForm::one_form(
                    &tgt_base,
                    to_chart.coords.iter().map(|x| y.diff(x)).collect(),
                )
            })
            .collect();
        let from_chart = m.chart(&from)?;
        let map: HashMap<Symbol, Expr> = from_chart
            .coords
            .iter()
            .map(|c| Symbol::from(c.as_str()))
            .zip(tr.exprs.iter().cloned())
            .collect();
        src.substitute_basis(&images, |e| e.subs(&map))?
            .change_coframe(target)
    }

    /// Value on a tuple of vectors given by their components in this
    /// coframe's dual frame.
    pub fn eval_on(&self, vectors: &[Vec<Expr>]) -> Expr {
        assert_eq!(vectors.len(), self.degree, "one vector per slot");
        let mut total = Expr::zero();
        for (b, e) in &self.comps {
            let ix = b.indices();
            let m: Matrix = ix
                .iter()
                .map(|&i| vectors.iter().map(|v| v[i].clone()).collect())
                .collect();
            total = total + e.mul_ref(&matrix::det(&m));
        }
        total
    }

    fn term_strings(&self, latex: bool) -> Vec<String> {
        let sym = if latex {
            &self.coframe.latex
        } else {
            &self.coframe.symbols
        };
        let wedge = if latex { " \\wedge " } else { "∧" };
        self.comps
            .iter()
            .map(|(b, e)| {
                let basis: Vec<&str> = b.indices().iter().map(|&i| sym[i].as_str()).collect();
                let basis = basis.join(wedge);
                let coef = if latex {
                    latex_coefficient(e)
                } else {
                    plain_coefficient(e)
                };
                match (coef.as_str(), basis.is_empty()) {
                    (c, true) => c.to_string(),
                    ("1", false) => basis,
                    ("-1", false) => format!("-{}", basis),
                    (c, false) => format!("{} {}", c, basis),
                }
            })
            .collect()
    }

    /// Display in the coframe symbols, e.g. `2*x dx + dy`.
    pub fn display(&self) -> String {
        join_terms(self.term_strings(false), "0")
    }

    pub fn to_latex(&self) -> String {
        join_terms(self.term_strings(true), "0")
    }

    /// `{"i,j,..": "expr"}` keyed by index tuples starting at `start`.
    pub fn to_json(&self, start: usize) -> Value {
        let mut obj = serde_json::Map::new();
        for (b, e) in &self.comps {
            let key: Vec<String> = b
                .indices()
                .iter()
                .map(|i| (i + start).to_string())
                .collect();
            obj.insert(key.join(","), Value::String(e.to_string()));
        }
        Value::Object(obj)
    }

    /// Reads components written by [`DiffForm::to_json`].
    pub fn from_json(
        coframe: &Arc<Coframe>,
        degree: usize,
        start: usize,
        v: &Value,
    ) -> Result<Self, FormError> {
        let mut comps = Vec::new();
        if let Some(obj) = v.as_object() {
            for (k, e) in obj {
                let ix: Vec<usize> = if k.is_empty() {
                    Vec::new()
                } else {
                    k.split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<usize>()
                                .unwrap_or(usize::MAX)
                                .wrapping_sub(start)
                        })
                        .collect()
                };
                let e = symexpr::parse(e.as_str().unwrap_or(""))?;
                comps.push((ix, e));
            }
        }
        Self::from_components(coframe, degree, comps)
    }
}

fn blade_image(
    b: Blade,
    images: &[DiffForm],
    target: &Arc<Coframe>,
    cache: &mut HashMap<Blade, DiffForm>,
) -> DiffForm {
    if let Some(f) = cache.get(&b) {
        return f.clone();
    }
    let ix = b.indices();
    let out = match ix.split_first() {
        None => DiffForm::scalar(target, Expr::one()),
        Some((&first, rest)) => {
            let tail = blade_image(Blade::from_indices(rest), images, target, cache);
            images[first].wedge_same(&tail)
        }
    };
    cache.insert(b, out.clone());
    out
}

fn is_single_term(s: &str) -> bool {
    let mut depth = 0i32;
    for (k, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && k > 0 => return false,
            _ => {}
        }
    }
    true
}

fn plain_coefficient(e: &Expr) -> String {
    let s = e.to_string();
    if is_single_term(&s) {
        s
    } else {
        format!("({})", s)
    }
}

fn latex_coefficient(e: &Expr) -> String {
    let s = e.to_latex();
    if is_single_term(&e.to_string()) {
        s
    } else {
        format!("\\left({}\\right)", s)
    }
}

fn join_terms(terms: Vec<String>, empty: &str) -> String {
    if terms.is_empty() {
        return empty.to_string();
    }
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        if k == 0 {
            out.push_str(t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(t);
        }
    }
    out
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

/// An element of the direct sum of all form degrees `0..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedForm {
    parts: Vec<DiffForm>,
}

impl MixedForm {
    pub fn zero(coframe: &Arc<Coframe>) -> Self {
        MixedForm {
            parts: (0..=coframe.dim())
                .map(|k| DiffForm::zero(coframe, k))
                .collect(),
        }
    }

    pub fn one(coframe: &Arc<Coframe>) -> Self {
        Self::scalar(coframe, Expr::one())
    }

    pub fn scalar(coframe: &Arc<Coframe>, f: Expr) -> Self {
        Self::homogeneous(DiffForm::scalar(coframe, f))
    }

    pub fn homogeneous(a: DiffForm) -> Self {
        let mut m = Self::zero(&a.coframe);
        if a.degree <= a.dim() {
            let k = a.degree;
            m.parts[k] = a;
        }
        m
    }

    /// From forms of arbitrary degrees on one coframe; equal degrees add.
    pub fn from_parts(coframe: &Arc<Coframe>, forms: Vec<DiffForm>) -> Result<Self, FormError> {
        let mut m = Self::zero(coframe);
        for a in forms {
            if a.degree <= coframe.dim() {
                let k = a.degree;
                m.parts[k] = m.parts[k].add(&a)?;
            }
        }
        Ok(m)
    }

    pub fn coframe(&self) -> &Arc<Coframe> {
        &self.parts[0].coframe
    }

    pub fn dim(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn part(&self, k: usize) -> &DiffForm {
        &self.parts[k]
    }

    pub fn parts(&self) -> &[DiffForm] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(DiffForm::is_zero)
    }

    fn align(&self, other: &MixedForm) -> Result<MixedForm, FormError> {
        if self.coframe() == other.coframe() {
            Ok(other.clone())
        } else {
            other.change_coframe(self.coframe())
        }
    }

    pub fn add(&self, other: &MixedForm) -> Result<Self, FormError> {
        let o = self.align(other)?;
        let parts = self
            .parts
            .iter()
            .zip(&o.parts)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(MixedForm { parts })
    }

    pub fn sub(&self, other: &MixedForm) -> Result<Self, FormError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MixedForm {
            parts: self.parts.iter().map(DiffForm::neg).collect(),
        }
    }

    pub fn scale(&self, c: &Expr) -> Self {
        MixedForm {
            parts: self.parts.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Degree-wise product: `(A∧B)_k = Σ_j A_j ∧ B_{k−j}`.
    pub fn mul(&self, other: &MixedForm) -> Result<Self, FormError> {
        let o = self.align(other)?;
        Ok(self.mul_same(&o))
    }

    pub(crate) fn mul_same(&self, o: &MixedForm) -> Self {
        let mut out = Self::zero(self.coframe());
        let n = self.dim();
        for (i, a) in self.parts.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in o
                .parts
                .iter()
                .enumerate()
                .take(n + 1 - i)
                .filter(|(_, b)| !b.is_zero())
            {
                let w = a.wedge_same(b);
                for (bl, e) in w.comps {
                    out.parts[i + j].accumulate(bl, e);
                }
            }
        }
        out
    }

    pub(crate) fn add_same(&self, o: &MixedForm) -> Self {
        let mut out = self.clone();
        for (k, p) in o.parts.iter().enumerate() {
            for (bl, e) in &p.comps {
                out.parts[k].accumulate(*bl, e.clone());
            }
        }
        out
    }

    pub fn d(&self) -> Result<Self, FormError> {
        let mut out = Self::zero(self.coframe());
        for (k, p) in self.parts.iter().enumerate() {
            if k < self.dim() && !p.is_zero() {
                out.parts[k + 1] = p.d()?;
            }
        }
        Ok(out)
    }

    pub fn change_coframe(&self, target: &Arc<Coframe>) -> Result<Self, FormError> {
        let parts = self
            .parts
            .iter()
            .map(|p| p.change_coframe(target))
            .collect::<Result<_, _>>()?;
        Ok(MixedForm { parts })
    }

    pub fn change_chart(&self, m: &Manifold, target: &Arc<Coframe>) -> Result<Self, FormError> {
        let parts = self
            .parts
            .iter()
            .map(|p| p.change_chart(m, target))
            .collect::<Result<_, _>>()?;
        Ok(MixedForm { parts })
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        MixedForm {
            parts: self.parts.iter().map(|p| p.map(&f)).collect(),
        }
    }

    /// `[a]_0 + [b]_1 + ...`.
    pub fn display(&self) -> String {
        let v: Vec<String> = self
            .parts
            .iter()
            .enumerate()
            .map(|(k, p)| format!("[{}]_{}", p.display(), k))
            .collect();
        v.join(" + ")
    }

    pub fn to_latex(&self) -> String {
        let v: Vec<String> = self
            .parts
            .iter()
            .enumerate()
            .map(|(k, p)| format!("\\left[ {} \\right]_{{{}}}", p.to_latex(), k))
            .collect();
        v.join(" + ")
    }

    /// Degree → {index tuple → expression}.
    pub fn to_json(&self, start: usize) -> Value {
        let mut obj = serde_json::Map::new();
        for (k, p) in self.parts.iter().enumerate() {
            obj.insert(k.to_string(), p.to_json(start));
        }
        json!({ "coframe": self.coframe().symbols, "degrees": Value::Object(obj) })
    }

    pub fn from_json(coframe: &Arc<Coframe>, start: usize, v: &Value) -> Result<Self, FormError> {
        let mut m = Self::zero(coframe);
        if let Some(obj) = v.get("degrees").and_then(Value::as_object) {
            for (k, p) in obj {
                let k: usize = k.parse().map_err(|_| FormError::Degree {
                    expected: 0,
                    found: usize::MAX,
                })?;
                if k <= coframe.dim() {
                    m.parts[k] = DiffForm::from_json(coframe, k, start, p)?;
                }
            }
        }
        Ok(m)
    }
}

impl fmt::Display for MixedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Manifold;
    use symexpr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn plane() -> Arc<Coframe> {
        let mut m = Manifold::new("R2", 2);
        m.add_chart("X", "R2", &["x", "y"], vec![]).unwrap();
        Coframe::coordinate(m.chart("X").unwrap())
    }

    fn one(c: &Arc<Coframe>, a: &str, b: &str) -> DiffForm {
        DiffForm::one_form(c, vec![p(a), p(b)])
    }

    #[test]
    fn blade_signs() {
        assert_eq!(
            Blade::wedge(Blade::single(1), Blade::single(0)),
            Some((Blade(3), true))
        );
        assert_eq!(
            Blade::wedge(Blade::single(0), Blade::single(1)),
            Some((Blade(3), false))
        );
        assert_eq!(Blade::wedge(Blade::single(0), Blade::single(0)), None);
        assert_eq!(sort_indices(&[2, 0, 1]), Some((Blade(7), false)));
        assert!(Blade::from_indices(&[0, 1]) < Blade::from_indices(&[0, 2]));
        assert!(Blade::from_indices(&[0, 2]) < Blade::from_indices(&[1, 2]));
    }

    #[test]
    fn wedge_and_d() {
        let c = plane();
        let dx = DiffForm::basis(&c, 0);
        assert!(dx.wedge(&dx).unwrap().is_zero());
        let a = one(&c, "y", "2*x");
        let b = one(&c, "x", "y");
        assert_eq!(a.wedge(&b).unwrap().comp(&[0, 1]), p("y^2 - 2*x^2"));
        assert_eq!(a.d().unwrap().comp(&[0, 1]), Expr::one());
        assert_eq!(
            DiffForm::scalar(&c, p("x^2")).d().unwrap(),
            one(&c, "2*x", "0")
        );
        assert_eq!(a.wedge(&b).unwrap().display(), "(-2*x^2 + y^2) dx∧dy");
    }

    #[test]
    fn mixed_product_matches_worked_example() {
        let c = plane();
        let a = MixedForm::from_parts(
            &c,
            vec![
                DiffForm::scalar(&c, p("x^2")),
                one(&c, "y", "2*x"),
                DiffForm::from_components(&c, 2, [(vec![0, 1], p("4*x^3"))]).unwrap(),
            ],
        )
        .unwrap();
        let b = MixedForm::from_parts(
            &c,
            vec![DiffForm::scalar(&c, Expr::int(2)), one(&c, "x", "y")],
        )
        .unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.part(0).comp(&[]), p("2*x^2"));
        assert_eq!(ab.part(1), &one(&c, "x^3 + 2*y", "x^2*y + 4*x"));
        assert_eq!(ab.part(2).comp(&[0, 1]), p("8*x^3 - 2*x^2 + y^2"));
        let ba = b.mul(&a).unwrap();
        assert_eq!(ba.part(2).comp(&[0, 1]), p("8*x^3 + 2*x^2 - y^2"));
        assert_eq!(a.mul(&MixedForm::one(&c)).unwrap(), a);
        let da = a.d().unwrap();
        assert_eq!(da.display(), "[0]_0 + [2*x dx]_1 + [dx∧dy]_2");
        assert!(da.d().unwrap().is_zero());
    }

    #[test]
    fn linked_coframe_round_trip() {
        let c = plane();
        let link = vec![vec![p("1"), p("x")], vec![p("0"), p("2")]];
        let e = Coframe::linked("E", "e", 1, &c, link).unwrap();
        let a = DiffForm::from_components(&c, 2, [(vec![0, 1], p("x*y"))]).unwrap();
        let b = a.change_coframe(&e).unwrap();
        assert_eq!(b.comp(&[0, 1]), p("2*x*y"));
        assert_eq!(b.change_coframe(&c).unwrap(), a);
        // the value on the dual frame vectors does not depend on the coframe
        let w = DiffForm::one_form(&c, vec![p("y"), p("1")]);
        let we = w.change_coframe(&e).unwrap();
        let e2 = vec![p("x"), p("2")];
        assert_eq!(w.eval_on(&[e2]), we.comp(&[1]));
    }

    #[test]
    fn json_round_trip() {
        let c = plane();
        let a = one(&c, "y/(1+x^2)", "A'(x)");
        let v = a.to_json(1);
        assert_eq!(v, json!({"1": "y/(x^2 + 1)", "2": "A'(x)"}));
        assert_eq!(DiffForm::from_json(&c, 1, 1, &v).unwrap(), a);
        let m = MixedForm::homogeneous(a);
        assert_eq!(MixedForm::from_json(&c, 1, &m.to_json(1)).unwrap(), m);
    }
}
