//! Characteristic classes and the Chern–Weil construction of their forms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use symexpr::{parse, Expr, ExprError};
use thiserror::Error;

use crate::bundle::{Field, VectorBundle};
use crate::connection::{BundleConnection, ConnectionError, CurvatureMatrix};
use crate::forms::{Coframe, FormError, MixedForm};
use crate::matrix::{self, Ring};
use crate::series::{taylor, transform_series, ClassType, SeriesError};

#[derive(Debug, Error)]
pub enum CharClassError {
    #[error("{class} needs a {expected:?} bundle, got {found:?}")]
    FieldMismatch {
        class: String,
        expected: Field,
        found: Field,
    },
    #[error("Pfaffian class {class} needs even rank, got {rank}")]
    OddRank { class: String, rank: usize },
    #[error("unknown class keyword `{0}`")]
    UnknownClass(String),
    #[error("curvature on frame {frame} must be skew-symmetric for a Pfaffian class")]
    NotSkew { frame: String },
    #[error("no frames to compute on")]
    NoFrames,
    #[error("curvature on frame {frame} has rank {found}, bundle rank is {expected}")]
    Rank {
        frame: String,
        expected: usize,
        found: usize,
    },
    #[error("forms on frames {a} and {b} disagree in degree {degree}")]
    GluingConflict { a: String, b: String, degree: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The classes of the usual table, keyed by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predefined {
    Chern,
    ChernChar,
    Todd,
    Pontryagin,
    AHat,
    Hirzebruch,
    Euler,
}

impl Predefined {
    pub const ALL: [Predefined; 7] = [
        Predefined::Chern,
        Predefined::ChernChar,
        Predefined::Todd,
        Predefined::Pontryagin,
        Predefined::AHat,
        Predefined::Hirzebruch,
        Predefined::Euler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predefined::Chern => "Chern",
            Predefined::ChernChar => "ChernChar",
            Predefined::Todd => "Todd",
            Predefined::Pontryagin => "Pontryagin",
            Predefined::AHat => "AHat",
            Predefined::Hirzebruch => "Hirzebruch",
            Predefined::Euler => "Euler",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
    }

    pub fn class_type(self) -> ClassType {
        match self {
            Predefined::ChernChar => ClassType::Additive,
            Predefined::Euler => ClassType::Pfaffian,
            _ => ClassType::Multiplicative,
        }
    }

    pub fn field(self) -> Field {
        match self {
            Predefined::Chern | Predefined::ChernChar | Predefined::Todd => Field::Complex,
            _ => Field::Real,
        }
    }

    /// Base function in the variable `x`.
    pub fn function(self) -> Expr {
        let s = match self {
            Predefined::Chern | Predefined::Pontryagin => "1 + x",
            Predefined::ChernChar => "exp(x)",
            Predefined::Todd => "x/(1 - exp(-x))",
            Predefined::AHat => "sqrt(x)/(2*sinh(sqrt(x)/2))",
            Predefined::Hirzebruch => "sqrt(x)/tanh(sqrt(x))",
            Predefined::Euler => "x",
        };
        parse(s).expect("built-in class function")
    }
}

type RegistryKey = (u64, ClassType, Expr, String);

fn registry() -> &'static Mutex<HashMap<RegistryKey, Arc<CharClass>>> {
    static R: OnceLock<Mutex<HashMap<RegistryKey, Arc<CharClass>>>> = OnceLock::new();
    R.get_or_init(Default::default)
}

/// A class type with base function `g`, bound to a bundle.
pub struct CharClass {
    name: String,
    ty: ClassType,
    g: Expr,
    var: String,
    bundle_id: u64,
    rank: usize,
    field: Field,
    coeffs: Vec<Expr>,
    vanishes: bool,
    cache: Mutex<HashMap<(u64, Vec<String>), Arc<CharacteristicForm>>>,
}

impl fmt::Debug for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharClass")
            .field("name", &self.name)
            .field("type", &self.ty)
            .field("g", &self.g)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl CharClass {
    /// Builds (or fetches the already built) class of `bundle` with the
    /// given type and base function `g` in `var`.
    pub fn new(
        bundle: &VectorBundle,
        name: &str,
        ty: ClassType,
        g: Expr,
        var: &str,
    ) -> Result<Arc<CharClass>, CharClassError> {
        if ty == ClassType::Pfaffian {
            if bundle.field() != Field::Real {
                return Err(CharClassError::FieldMismatch {
                    class: name.into(),
                    expected: Field::Real,
                    found: bundle.field(),
                });
            }
            if bundle.rank() % 2 == 1 {
                return Err(CharClassError::OddRank {
                    class: name.into(),
                    rank: bundle.rank(),
                });
            }
        }
        let key = (bundle.id(), ty, g.clone(), name.to_string());
        if let Some(c) = registry().lock().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let dim = bundle.base().dim();
        let series = taylor(&g, var, dim / 2 + 1)?;
        let (coeffs, vanishes) = transform_series(&series, ty, bundle.field(), dim)?;
        let c = Arc::new(CharClass {
            name: name.into(),
            ty,
            g,
            var: var.into(),
            bundle_id: bundle.id(),
            rank: bundle.rank(),
            field: bundle.field(),
            coeffs,
            vanishes,
            cache: Mutex::new(HashMap::new()),
        });
        Ok(registry().lock().unwrap().entry(key).or_insert(c).clone())
    }

    pub fn predefined(
        kind: Predefined,
        bundle: &VectorBundle,
    ) -> Result<Arc<CharClass>, CharClassError> {
        if kind.field() != bundle.field() {
            return Err(CharClassError::FieldMismatch {
                class: kind.name().into(),
                expected: kind.field(),
                found: bundle.field(),
            });
        }
        Self::new(bundle, kind.name(), kind.class_type(), kind.function(), "x")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class_type(&self) -> ClassType {
        self.ty
    }

    pub fn function(&self) -> &Expr {
        &self.g
    }

    pub fn variable(&self) -> &str {
        &self.var
    }

    /// `[c₀..c_k]` applied to `Ω/2πε`.
    pub fn coefficients(&self) -> &[Expr] {
        &self.coeffs
    }

    /// True when the Pfaffian transform of `g` is identically zero.
    pub fn vanishes(&self) -> bool {
        self.vanishes
    }

    pub fn epsilon(&self) -> Expr {
        epsilon(self.ty)
    }

    /// The characteristic form from the connection, computed on every frame
    /// the connection has forms on. Results are cached per connection.
    pub fn get_form(
        &self,
        bundle: &VectorBundle,
        conn: &BundleConnection,
    ) -> Result<Arc<CharacteristicForm>, CharClassError> {
        let frames: Vec<String> = conn.frames().map(String::from).collect();
        self.get_form_on(bundle, conn, &frames)
    }

    /// As [`CharClass::get_form`], restricted to (or extended to) the given
    /// frames; forms on missing frames come from registered frame changes.
    pub fn get_form_on(
        &self,
        bundle: &VectorBundle,
        conn: &BundleConnection,
        frames: &[String],
    ) -> Result<Arc<CharacteristicForm>, CharClassError> {
        self.check_bundle(bundle);
        let key = (conn.id(), frames.to_vec());
        if let Some(f) = self.cache.lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let curv: Vec<CurvatureMatrix> = frames
            .par_iter()
            .map(|f| conn.curvature(bundle, f))
            .collect::<Result<_, _>>()?;
        let out = Arc::new(self.from_curvature(bundle, &curv)?);
        Ok(self.cache.lock().unwrap().entry(key).or_insert(out).clone())
    }

    /// The characteristic form from curvature matrices supplied by hand,
    /// one per frame.
    pub fn from_curvature(
        &self,
        bundle: &VectorBundle,
        curv: &[CurvatureMatrix],
    ) -> Result<CharacteristicForm, CharClassError> {
        self.check_bundle(bundle);
        if curv.is_empty() {
            return Err(CharClassError::NoFrames);
        }
        for c in curv {
            if c.rank() != self.rank {
                return Err(CharClassError::Rank {
                    frame: c.frame.clone(),
                    expected: self.rank,
                    found: c.rank(),
                });
            }
            if self.ty == ClassType::Pfaffian && !c.is_skew() {
                return Err(CharClassError::NotSkew {
                    frame: c.frame.clone(),
                });
            }
        }
        let pieces: Vec<(String, MixedForm)> = curv
            .par_iter()
            .map(|c| Ok((c.frame.clone(), self.evaluate(c)?)))
            .collect::<Result<_, CharClassError>>()?;
        let mut glued = CharacteristicForm {
            class: self.name.clone(),
            pieces: BTreeMap::new(),
        };
        for (frame, form) in pieces {
            glued.insert(bundle, &frame, form)?;
        }
        Ok(glued)
    }

    /// `P(f(Ω/2πε))` on one frame.
    pub fn evaluate(&self, c: &CurvatureMatrix) -> Result<MixedForm, CharClassError> {
        let scale = Expr::one().checked_div(&(Expr::int(2) * Expr::pi() * self.epsilon()))?;
        let x: Vec<Vec<MixedForm>> = c
            .entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|w| MixedForm::homogeneous(w.scale(&scale)))
                    .collect()
            })
            .collect();
        let fx = functional_calculus(&self.coeffs, &x, c.coframe());
        Ok(match self.ty {
            ClassType::Multiplicative => matrix::det(&fx),
            ClassType::Additive => matrix::trace(&fx),
            ClassType::Pfaffian => matrix::pfaffian(&fx),
        })
    }

    fn check_bundle(&self, bundle: &VectorBundle) {
        debug_assert_eq!(
            bundle.id(),
            self.bundle_id,
            "class used with a different bundle"
        );
        debug_assert_eq!(bundle.field(), self.field);
    }
}

/// `ε = 1` for Pfaffian classes and `i` otherwise.
pub fn epsilon(ty: ClassType) -> Expr {
    match ty {
        ClassType::Pfaffian => Expr::one(),
        _ => Expr::i(),
    }
}

/// `c₀·1 + c₁X + … + c_kX^k` over the ring of even mixed forms, by Horner's
/// scheme.
pub fn functional_calculus(
    coeffs: &[Expr],
    x: &[Vec<MixedForm>],
    coframe: &Arc<Coframe>,
) -> Vec<Vec<MixedForm>> {
    let n = x.len();
    let diag = |c: &Expr| -> Vec<Vec<MixedForm>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            MixedForm::scalar(coframe, c.clone())
                        } else {
                            MixedForm::zero(coframe)
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let mut acc = diag(coeffs.last().unwrap_or(&Expr::zero()));
    for c in coeffs.iter().rev().skip(1) {
        acc = matrix::mul(&acc, x);
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] = row[i].add_same(&MixedForm::scalar(coframe, c.clone()));
        }
    }
    acc
}

pub fn invariant_det(m: &[Vec<MixedForm>]) -> MixedForm {
    matrix::det(m)
}

pub fn invariant_trace(m: &[Vec<MixedForm>]) -> MixedForm {
    matrix::trace(m)
}

pub fn invariant_pfaffian(m: &[Vec<MixedForm>]) -> Result<MixedForm, CharClassError> {
    let n = m.len();
    let skew = (0..n).all(|i| (0..n).all(|j| Ring::add(&m[i][j], &m[j][i]).is_zero()));
    if n % 2 == 1 || !skew {
        return Err(CharClassError::NotSkew {
            frame: String::new(),
        });
    }
    Ok(matrix::pfaffian(m))
}

/// Per-frame pieces of a characteristic form, agreeing on overlaps.
#[derive(Clone, Debug)]
pub struct CharacteristicForm {
    pub class: String,
    pieces: BTreeMap<String, MixedForm>,
}

impl CharacteristicForm {
    pub fn frames(&self) -> impl Iterator<Item = &str> {
        self.pieces.keys().map(String::as_str)
    }

    pub fn on(&self, frame: &str) -> Option<&MixedForm> {
        self.pieces.get(frame)
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&str, &MixedForm)> {
        self.pieces.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Some piece, in preference order of the frame names.
    pub fn first(&self) -> &MixedForm {
        self.pieces.values().next().expect("at least one frame")
    }

    pub fn d(&self) -> Result<Vec<(String, MixedForm)>, FormError> {
        self.pieces
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.d()?)))
            .collect()
    }

    /// Adds the piece on `frame`, checking it against the pieces already
    /// present wherever their charts are related by a transition.
    fn insert(
        &mut self,
        bundle: &VectorBundle,
        frame: &str,
        form: MixedForm,
    ) -> Result<(), CharClassError> {
        let m = bundle.base();
        let mine = to_coordinates(&form)?;
        for (other, theirs) in &self.pieces {
            let theirs = to_coordinates(theirs)?;
            let (ca, cb) = (
                mine.coframe().chart().to_string(),
                theirs.coframe().chart().to_string(),
            );
            let moved = if ca == cb {
                mine.clone()
            } else if m.transition(&cb, &ca).is_ok() {
                mine.change_chart(m, theirs.coframe())?
            } else {
                continue;
            };
            for k in 0..=moved.dim() {
                let (p, q) = (moved.part(k), theirs.part(k));
                let agree = p == q
                    || p.sub(q)
                        .map(|d| d.components().all(|(_, e)| crate::same(e, &Expr::zero())))
                        .unwrap_or(false);
                if !agree {
                    return Err(CharClassError::GluingConflict {
                        a: frame.into(),
                        b: other.clone(),
                        degree: k,
                    });
                }
            }
        }
        self.pieces.insert(frame.into(), form);
        Ok(())
    }
}

fn to_coordinates(f: &MixedForm) -> Result<MixedForm, FormError> {
    match f.coframe().base() {
        Some(b) => f.change_coframe(&b.clone()),
        None => Ok(f.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::levi_civita;
    use crate::connection::{Metric, Signature};
    use crate::forms::DiffForm;
    use crate::geometry::Manifold;

    fn minkowski() -> (VectorBundle, BundleConnection) {
        let mut m = Manifold::new("M", 2);
        m.add_chart("X", "M", &["t", "x"], vec![]).unwrap();
        let m = m.freeze();
        let mut e = VectorBundle::new("E", 1, Field::Complex, &m);
        e.add_frame("e", "M", "X").unwrap();
        let cof = e.coordinate_coframe("e").unwrap();
        let mut nab = BundleConnection::new("nabla", &e);
        nab.set_form(
            "e",
            0,
            0,
            DiffForm::one_form(&cof, vec![Expr::zero(), parse("I*A(t)").unwrap()]),
        )
        .unwrap();
        (e, nab)
    }

    #[test]
    fn chern_character_of_u1_connection() {
        let (e, nab) = minkowski();
        let ch = CharClass::predefined(Predefined::ChernChar, &e).unwrap();
        let f = ch.get_form(&e, &nab).unwrap();
        let m = f.on("e").unwrap();
        assert_eq!(m.part(0).comp(&[]), Expr::one());
        assert_eq!(m.part(2).comp(&[0, 1]), parse("A'(t)/(2*pi)").unwrap());
        assert!(m.d().unwrap().is_zero());
        // same object on repeated construction, cached result
        assert!(Arc::ptr_eq(
            &ch,
            &CharClass::predefined(Predefined::ChernChar, &e).unwrap()
        ));
        assert!(Arc::ptr_eq(&f, &ch.get_form(&e, &nab).unwrap()));
    }

    #[test]
    fn field_and_rank_checks() {
        let (e, _) = minkowski();
        assert!(matches!(
            CharClass::predefined(Predefined::Pontryagin, &e),
            Err(CharClassError::FieldMismatch { .. })
        ));
        let m = e.base().clone();
        let r = VectorBundle::new("R", 3, Field::Real, &m);
        assert!(matches!(
            CharClass::predefined(Predefined::Euler, &r),
            Err(CharClassError::OddRank { .. })
        ));
        assert!(matches!(
            CharClass::predefined(Predefined::Chern, &r),
            Err(CharClassError::FieldMismatch { .. })
        ));
    }

    #[test]
    fn flat_connection_gives_one() {
        let (e, _) = minkowski();
        let mut flat = BundleConnection::new("flat", &e);
        flat.set_flat("e", &e.coordinate_coframe("e").unwrap());
        for k in [Predefined::Chern, Predefined::Todd] {
            let f = CharClass::predefined(k, &e)
                .unwrap()
                .get_form(&e, &flat)
                .unwrap();
            assert_eq!(
                *f.first(),
                MixedForm::one(&e.coordinate_coframe("e").unwrap())
            );
        }
    }

    #[test]
    fn euler_form_of_round_sphere() {
        let mut m = Manifold::new("S2", 2);
        m.open_subset("U", &[]).unwrap();
        m.add_chart("N", "U", &["x", "y"], vec![]).unwrap();
        let m = m.freeze();
        let tm = VectorBundle::tangent("TS2", &m).unwrap();
        let cof = tm.coordinate_coframe("N").unwrap();
        let c = parse("4/(1+x^2+y^2)^2").unwrap();
        let g = Metric::new(
            "g",
            Signature::Riemannian,
            &cof,
            vec![vec![c.clone(), Expr::zero()], vec![Expr::zero(), c]],
        )
        .unwrap();
        let nab = levi_civita(&g, &tm, "nabla").unwrap();
        let eu = CharClass::predefined(Predefined::Euler, &tm).unwrap();
        let f = eu.get_form(&tm, &nab).unwrap();
        assert_eq!(
            f.first().part(2).comp(&[0, 1]),
            parse("2/(pi*(1+x^2+y^2)^2)").unwrap()
        );
        assert!(f.first().part(0).is_zero());
    }

    #[test]
    fn functional_calculus_truncates_by_nilpotency() {
        let (e, nab) = minkowski();
        let c = nab.curvature(&e, "e").unwrap();
        let x: Vec<Vec<MixedForm>> = c
            .entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|w| MixedForm::homogeneous(w.clone()))
                    .collect()
            })
            .collect();
        let short = functional_calculus(&[Expr::one(), Expr::one()], &x, c.coframe());
        let long = functional_calculus(
            &[
                Expr::one(),
                Expr::one(),
                Expr::rational(1, 2),
                Expr::rational(1, 6),
            ],
            &x,
            c.coframe(),
        );
        assert_eq!(short, long);
    }
}
