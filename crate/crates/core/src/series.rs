//! Truncated power series with exact coefficients, Taylor expansion of
//! base functions and the class-type transforms.

use std::fmt;

use num_traits::Signed;
use symexpr::{BigRational, Expr, ExprError, Func, Node};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("`{0}` is not analytic at 0")]
    NotAnalytic(String),
    #[error("series has zero constant term")]
    NotInvertible,
    #[error("square root needs constant term 1, got {0}")]
    SqrtBranch(String),
    #[error("real multiplicative classes need g(0) = 1, got {0}")]
    MultiplicativeBranch(String),
    #[error("real additive classes need g(0) = 0, got {0}")]
    AdditiveBranch(String),
    #[error("coefficient {0} depends on variables")]
    NotConstant(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `c₀ + c₁x + … + c_K x^K`, exact through order `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<Expr>,
}

impl PowerSeries {
    /// Zero with truncation order `order`.
    pub fn zero(order: usize) -> Self {
        PowerSeries {
            coeffs: vec![Expr::zero(); order + 1],
        }
    }

    pub fn constant(c: Expr, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series `x`.
    pub fn x(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = Expr::one();
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<Expr>) -> Self {
        assert!(!coeffs.is_empty(), "at least the constant term");
        PowerSeries { coeffs }
    }

    pub fn from_rationals(c: &[(i64, i64)]) -> Self {
        Self::from_coeffs(c.iter().map(|&(n, d)| Expr::rational(n, d)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(k).cloned().unwrap_or_else(Expr::zero)
    }

    /// Exact rational coefficients, when they all are rational.
    pub fn rationals(&self) -> Option<Vec<BigRational>> {
        self.coeffs.iter().map(Expr::as_rational).collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, Expr::zero());
        PowerSeries { coeffs: c }
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn common(&self, o: &PowerSeries) -> usize {
        self.order().min(o.order())
    }

    pub fn add(&self, o: &PowerSeries) -> Self {
        let k = self.common(o);
        PowerSeries {
            coeffs: (0..=k)
                .map(|i| self.coeffs[i].add_ref(&o.coeffs[i]))
                .collect(),
        }
    }

    pub fn sub(&self, o: &PowerSeries) -> Self {
        let k = self.common(o);
        PowerSeries {
            coeffs: (0..=k)
                .map(|i| self.coeffs[i].sub_ref(&o.coeffs[i]))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &Expr) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|x| x.mul_ref(c)).collect(),
        }
    }

    pub fn mul(&self, o: &PowerSeries) -> Self {
        let k = self.common(o);
        let mut out = vec![Expr::zero(); k + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(k + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(k + 1 - i) {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add_ref(&a.mul_ref(b));
                }
            }
        }
        PowerSeries { coeffs: out }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Self::constant(Expr::one(), self.order());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `1/S` for `S(0) ≠ 0`.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let inv0 = Expr::one().checked_div(c0)?;
        let mut out = vec![inv0.clone()];
        for k in 1..=self.order() {
            let mut s = Expr::zero();
            for j in 1..=k {
                s = s.add_ref(&self.coeffs[j].mul_ref(&out[k - j]));
            }
            out.push(-(s.mul_ref(&inv0)));
        }
        Ok(PowerSeries { coeffs: out })
    }

    /// Quotient allowing a common power of `x` to cancel; the result loses
    /// as many orders as the denominator's valuation.
    pub fn div(&self, o: &PowerSeries) -> Result<Self, SeriesError> {
        let v = o.valuation().ok_or(SeriesError::NotInvertible)?;
        if let Some(w) = self.valuation() {
            if w < v {
                return Err(SeriesError::NotInvertible);
            }
        } else {
            return Ok(Self::zero(self.common(o).saturating_sub(v)));
        }
        let a = PowerSeries {
            coeffs: self.coeffs[v..].to_vec(),
        };
        let b = PowerSeries {
            coeffs: o.coeffs[v..].to_vec(),
        };
        Ok(a.mul(&b.reciprocal()?))
    }

    /// `√S` for `S(0) = 1`, by the coefficient recurrence of `R² = S`.
    pub fn sqrt(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::SqrtBranch(self.coeffs[0].to_string()));
        }
        let half = Expr::rational(1, 2);
        let mut r = vec![Expr::one()];
        for k in 1..=self.order() {
            let mut s = self.coeffs[k].clone();
            for j in 1..k {
                s = s.sub_ref(&r[j].mul_ref(&r[k - j]));
            }
            r.push(s.mul_ref(&half));
        }
        Ok(PowerSeries { coeffs: r })
    }

    /// `S(T(x))` for `T(0) = 0`.
    pub fn compose(&self, t: &PowerSeries) -> Result<Self, SeriesError> {
        if !t.coeffs[0].is_zero() {
            return Err(SeriesError::NotAnalytic(
                "inner series with nonzero constant term".into(),
            ));
        }
        let k = self.common(t);
        let mut acc = Self::zero(k);
        let mut pw = Self::constant(Expr::one(), k);
        for c in self.coeffs.iter().take(k + 1) {
            if !c.is_zero() {
                acc = acc.add(&pw.scale(c));
            }
            pw = pw.mul(&t.truncate(k));
        }
        Ok(acc)
    }

    /// `S(x²)` through order `2K`.
    pub fn substitute_square(&self) -> Self {
        let mut out = vec![Expr::zero(); 2 * self.order() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[2 * k] = c.clone();
        }
        PowerSeries { coeffs: out }
    }

    /// `(S(x) − S(−x))/2`.
    pub fn odd_part(&self) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { c.clone() } else { Expr::zero() })
                .collect(),
        }
    }

    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| k % 2 == 0 || c.is_zero())
    }

    /// Keeps the even coefficients as a series in `x²`.
    fn even_to_square_root(&self) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().step_by(2).cloned().collect(),
        }
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}] + O(x^{})", v.join(", "), self.order() + 1)
    }
}

fn elementary(f: Func, order: usize) -> PowerSeries {
    // series of exp, sin, cos, sinh, cosh at 0
    let mut c = Vec::with_capacity(order + 1);
    let mut fact = BigRational::from_integer(1.into());
    for k in 0..=order {
        if k > 0 {
            fact *= BigRational::from_integer((k as i64).into());
        }
        let inv = Expr::from_rational(fact.recip());
        let v = match (f, k % 4) {
            (Func::Exp, _) => inv,
            (Func::Sinh, r) if r % 2 == 1 => inv,
            (Func::Cosh, r) if r % 2 == 0 => inv,
            (Func::Sin, 1) | (Func::Cos, 0) => inv,
            (Func::Sin, 3) | (Func::Cos, 2) => -inv,
            _ => Expr::zero(),
        };
        c.push(v);
    }
    PowerSeries { coeffs: c }
}

fn log1p(order: usize) -> PowerSeries {
    let mut c = vec![Expr::zero()];
    for k in 1..=order {
        let v = Expr::rational(1, k as i64);
        c.push(if k % 2 == 0 { -v } else { v });
    }
    PowerSeries { coeffs: c }
}

/// `(1 + x)^r` by the binomial series.
fn binomial(r: &BigRational, order: usize) -> PowerSeries {
    let mut c = vec![Expr::one()];
    let mut cur = BigRational::from_integer(1.into());
    for k in 1..=order {
        let kk = BigRational::from_integer((k as i64).into());
        cur = cur * (r - &kk + BigRational::from_integer(1.into())) / kk;
        c.push(Expr::from_rational(cur.clone()));
    }
    PowerSeries { coeffs: c }
}

/// Series of `f(a)` where `a` has series `s`.
fn apply_func(f: Func, s: &PowerSeries) -> Result<PowerSeries, SeriesError> {
    let k = s.order();
    let c0 = s.coeffs[0].clone();
    let mut t = s.clone();
    t.coeffs[0] = Expr::zero();
    Ok(match f {
        Func::Exp => elementary(Func::Exp, k).compose(&t)?.scale(&c0.exp()),
        Func::Sin | Func::Cos | Func::Sinh | Func::Cosh => {
            let (sf, cf) = match f {
                Func::Sin | Func::Cos => (Func::Sin, Func::Cos),
                _ => (Func::Sinh, Func::Cosh),
            };
            let st = elementary(sf, k).compose(&t)?;
            let ct = elementary(cf, k).compose(&t)?;
            let (s0, k0) = (Expr::func(sf, c0.clone()), Expr::func(cf, c0));
            match f {
                // sin(a+t) = sin a cos t + cos a sin t, and so on
                Func::Sin | Func::Sinh => ct.scale(&s0).add(&st.scale(&k0)),
                Func::Cos => ct.scale(&k0).sub(&st.scale(&s0)),
                _ => ct.scale(&k0).add(&st.scale(&s0)),
            }
        }
        Func::Tan => apply_func(Func::Sin, s)?.div(&apply_func(Func::Cos, s)?)?,
        Func::Tanh => apply_func(Func::Sinh, s)?.div(&apply_func(Func::Cosh, s)?)?,
        Func::Log => {
            if c0.is_zero() {
                return Err(SeriesError::NotAnalytic("log".into()));
            }
            let u = t.scale(&Expr::one().checked_div(&c0)?);
            log1p(k)
                .compose(&u)?
                .add(&PowerSeries::constant(c0.log(), k))
        }
        Func::Sqrt => root_series(s, 2)?,
    })
}

fn root_series(s: &PowerSeries, q: u32) -> Result<PowerSeries, SeriesError> {
    let k = s.order();
    let c0 = s.coeffs[0].clone();
    if c0.is_zero() {
        return Err(SeriesError::NotAnalytic(format!(
            "root of order {} at a zero",
            q
        )));
    }
    let u = s
        .scale(&Expr::one().checked_div(&c0)?)
        .sub(&PowerSeries::constant(Expr::one(), k));
    let r = BigRational::new(1.into(), (q as i64).into());
    Ok(binomial(&r, k).compose(&u)?.scale(&Expr::root(&c0, q)?))
}

struct Taylor<'a> {
    var: &'a str,
    /// When set, `sqrt(var)` maps to the series variable `u` and `var` to
    /// `u²`.
    sqrt_mode: bool,
    order: usize,
}

impl Taylor<'_> {
    fn series(&self, e: &Expr) -> Result<PowerSeries, SeriesError> {
        if e.is_constant() {
            return Ok(PowerSeries::constant(e.clone(), self.order));
        }
        match e.node() {
            Node::Var(v) if &*v == self.var => Ok(if self.sqrt_mode {
                PowerSeries::x(self.order).mul(&PowerSeries::x(self.order))
            } else {
                PowerSeries::x(self.order)
            }),
            Node::Var(v) => Err(SeriesError::NotConstant(v.to_string())),
            Node::Sum(ts) => {
                let mut acc = PowerSeries::zero(self.order);
                for t in &ts {
                    acc = acc.add(&self.series(t)?);
                }
                Ok(acc)
            }
            Node::Product(fs) => {
                let mut acc = PowerSeries::constant(Expr::one(), self.order);
                let mut dens = Vec::new();
                for f in &fs {
                    match f.node() {
                        Node::Pow(b, r)
                            if r < BigRational::from_integer(0.into()) && r.is_integer() =>
                        {
                            dens.push(self.series(&b)?.powi(neg_u32(&r)));
                        }
                        _ => acc = acc.mul(&self.series(f)?),
                    }
                }
                for d in dens {
                    acc = acc.div(&d)?;
                }
                Ok(acc)
            }
            Node::Pow(b, r) => {
                if let (Node::Var(v), true) = (b.node(), self.sqrt_mode) {
                    if &*v == self.var && r == BigRational::new(1.into(), 2.into()) {
                        return Ok(PowerSeries::x(self.order));
                    }
                }
                let s = self.series(&b)?;
                if r.is_integer() {
                    let n = r.to_integer();
                    return if n >= 0.into() {
                        Ok(s.powi(u32::try_from(n).unwrap_or(u32::MAX)))
                    } else {
                        PowerSeries::constant(Expr::one(), self.order).div(&s.powi(neg_u32(&r)))
                    };
                }
                let q: u32 = u32::try_from(r.denom().clone())
                    .map_err(|_| SeriesError::NotAnalytic(e.to_string()))?;
                let p = r.numer().clone();
                let root = root_series(&s, q)?;
                let pabs = u32::try_from(p.abs()).unwrap_or(u32::MAX);
                let pw = root.powi(pabs);
                if p < 0.into() {
                    PowerSeries::constant(Expr::one(), self.order).div(&pw)
                } else {
                    Ok(pw)
                }
            }
            Node::Func(Func::Sqrt, a) if self.sqrt_mode && a == Expr::var(self.var) => {
                Ok(PowerSeries::x(self.order))
            }
            Node::Func(f, a) => apply_func(f, &self.series(&a)?),
            Node::User(u, _) => Err(SeriesError::NotAnalytic(u.name.to_string())),
            Node::Rational(_) | Node::Pi | Node::I => {
                Ok(PowerSeries::constant(e.clone(), self.order))
            }
        }
    }
}

fn neg_u32(r: &BigRational) -> u32 {
    u32::try_from(-r.to_integer()).unwrap_or(u32::MAX)
}

/// Taylor series of `g` in `var` at 0 through order `order`.
///
/// Occurrences of `sqrt(var)` are handled by expanding in `u = √var` and
/// keeping the even part, which avoids choosing a branch.
pub fn taylor(g: &Expr, var: &str, order: usize) -> Result<PowerSeries, SeriesError> {
    let sqrt_mode = mentions_sqrt_of(g, var);
    let mut slack = 2;
    loop {
        let inner_order = if sqrt_mode { 2 * order } else { order } + slack;
        let t = Taylor {
            var,
            sqrt_mode,
            order: inner_order,
        };
        let s = t.series(g)?;
        let need = if sqrt_mode { 2 * order } else { order };
        if s.order() >= need {
            let s = s.truncate(need);
            if sqrt_mode {
                if !s.is_even() {
                    return Err(SeriesError::NotAnalytic(format!(
                        "{} (odd in sqrt({}))",
                        g, var
                    )));
                }
                return Ok(s.even_to_square_root());
            }
            return Ok(s);
        }
        slack *= 2;
        if slack > 64 {
            return Err(SeriesError::NotAnalytic(g.to_string()));
        }
    }
}

fn mentions_sqrt_of(g: &Expr, var: &str) -> bool {
    g.to_string().contains(&format!("sqrt({})", var))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassType {
    Additive,
    Multiplicative,
    Pfaffian,
}

impl ClassType {
    pub fn name(self) -> &'static str {
        match self {
            ClassType::Additive => "additive",
            ClassType::Multiplicative => "multiplicative",
            ClassType::Pfaffian => "Pfaffian",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "additive" => Some(ClassType::Additive),
            "multiplicative" => Some(ClassType::Multiplicative),
            "pfaffian" | "pfaff" => Some(ClassType::Pfaffian),
            _ => None,
        }
    }
}

/// Coefficients `[c₀..c_k]` of the function `f` applied to the scaled
/// curvature, `k = ⌊dim/2⌋`. Also reports whether a Pfaffian transform
/// came out identically zero.
pub fn transform_series(
    g: &PowerSeries,
    ty: ClassType,
    field: crate::bundle::Field,
    dim: usize,
) -> Result<(Vec<Expr>, bool), SeriesError> {
    use crate::bundle::Field;
    let k = dim / 2;
    let f = match (field, ty) {
        (_, ClassType::Pfaffian) => g.odd_part(),
        (Field::Complex, _) => g.clone(),
        (Field::Real, ClassType::Multiplicative) => {
            if !g.coeff(0).is_one() {
                return Err(SeriesError::MultiplicativeBranch(g.coeff(0).to_string()));
            }
            g.truncate(k / 2 + 1).substitute_square().sqrt()?
        }
        (Field::Real, ClassType::Additive) => {
            if !g.coeff(0).is_zero() {
                return Err(SeriesError::AdditiveBranch(g.coeff(0).to_string()));
            }
            g.truncate(k / 2 + 1)
                .substitute_square()
                .scale(&Expr::rational(1, 2))
        }
    };
    let f = f.truncate(k);
    let vanished = ty == ClassType::Pfaffian && f.coeffs.iter().all(Expr::is_zero);
    Ok((f.coeffs, vanished))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::Field;
    use symexpr::parse;

    fn rats(s: &PowerSeries) -> Vec<String> {
        s.coeffs().iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn exponential() {
        let s = taylor(&parse("exp(x)").unwrap(), "x", 3).unwrap();
        assert_eq!(rats(&s), ["1", "1", "1/2", "1/6"]);
        assert_eq!(
            rats(&taylor(&parse("1+x").unwrap(), "x", 1).unwrap()),
            ["1", "1"]
        );
    }

    #[test]
    fn todd_with_removable_singularity() {
        let s = taylor(&parse("x/(1-exp(-x))").unwrap(), "x", 4).unwrap();
        assert_eq!(rats(&s), ["1", "1/2", "1/12", "0", "-1/720"]);
    }

    #[test]
    fn ahat_in_z() {
        let g = parse("sqrt(z)/(2*sinh(sqrt(z)/2))").unwrap();
        let s = taylor(&g, "z", 2).unwrap();
        assert_eq!(rats(&s), ["1", "-1/24", "7/5760"]);
        let (c, _) = transform_series(&s, ClassType::Multiplicative, Field::Real, 8).unwrap();
        let c: Vec<String> = c.iter().map(|e| e.to_string()).collect();
        let c4 = Expr::rational(7, 11520) - Expr::rational(1, 4608);
        assert_eq!(c, ["1", "0", "-1/48", "0", &c4.to_string()]);
    }

    #[test]
    fn hirzebruch_and_transforms() {
        let s = taylor(&parse("sqrt(z)/tanh(sqrt(z))").unwrap(), "z", 2).unwrap();
        assert_eq!(rats(&s), ["1", "1/3", "-1/45"]);
        let id = taylor(&parse("x").unwrap(), "x", 3).unwrap();
        let (c, vanished) = transform_series(&id, ClassType::Pfaffian, Field::Real, 2).unwrap();
        assert_eq!(c, vec![Expr::zero(), Expr::one()]);
        assert!(!vanished);
        let (c, _) = transform_series(&id, ClassType::Additive, Field::Real, 4).unwrap();
        assert_eq!(c, vec![Expr::zero(), Expr::zero(), Expr::rational(1, 2)]);
        assert!(transform_series(&id, ClassType::Multiplicative, Field::Real, 4).is_err());
        let (_, vanished) = transform_series(
            &PowerSeries::x(4).powi(2),
            ClassType::Pfaffian,
            Field::Real,
            4,
        )
        .unwrap();
        assert!(vanished);
    }

    #[test]
    fn symbolic_constants_survive() {
        let s = taylor(&parse("exp(x + 1)").unwrap(), "x", 2).unwrap();
        assert_eq!(s.coeff(2), parse("exp(1)/2").unwrap());
        assert!(s.rationals().is_none());
        assert!(taylor(&parse("log(x)").unwrap(), "x", 2).is_err());
        assert!(taylor(&parse("1/x").unwrap(), "x", 2).is_err());
    }

    #[test]
    fn sqrt_squares_back() {
        let s = PowerSeries::from_rationals(&[(1, 1), (3, 7), (-2, 5), (1, 9), (4, 3)]);
        let r = s.sqrt().unwrap();
        assert_eq!(r.mul(&r), s);
        assert_eq!(
            s.mul(&s.reciprocal().unwrap()),
            PowerSeries::constant(Expr::one(), 4)
        );
    }
}
