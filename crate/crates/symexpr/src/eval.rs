//! Floating-point evaluation.
//!
//! Expressions are compiled once into a flat program over atom slots so that
//! repeated evaluation (quadrature, random sampling) avoids table lookups.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;

use crate::atom::{self, Atom, AtomId};
use crate::error::ExprError;
use crate::expr::{Expr, Func, Symbol, UserFn};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

/// Magnitude below which a denominator counts as a pole.
pub const POLE_EPS: f64 = 1e-300;

pub type NumFn = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// Numeric implementations of opaque functions, keyed by name and
/// derivative orders.
#[derive(Clone, Default)]
pub struct FnTable {
    map: HashMap<(Symbol, Vec<u32>), NumFn>,
}

impl FnTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers the implementation of `name` differentiated `derivs[k]`
    /// times in argument `k`.
    pub fn insert<F>(&mut self, name: &str, derivs: &[u32], f: F)
    where
        F: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    {
        self.map
            .insert((Symbol::from(name), derivs.to_vec()), Arc::new(f));
    }

    /// Registers the `order`-th derivative of a unary function.
    pub fn unary<F>(mut self, name: &str, order: u32, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.insert(name, &[order], move |a| f(a[0]));
        self
    }

    pub fn get(&self, f: &UserFn) -> Option<&NumFn> {
        self.map.get(&(f.name.clone(), f.derivs.clone()))
    }
}

/// How to treat opaque functions without an implementation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Missing {
    Error,
    /// A fixed smooth pseudo-random function per symbol, seeded by `u64`.
    Pseudo(u64),
}

#[derive(Clone)]
enum Op {
    Var(usize),
    Const(Complex64),
    Func(Func, Box<CRat>),
    Root(u32, Box<CRat>),
    User(NumFn, Vec<CRat>),
}

#[derive(Clone)]
struct CPoly {
    terms: Vec<(Complex64, Vec<(usize, u32)>)>,
}

#[derive(Clone)]
struct CRat {
    num: CPoly,
    den: Option<CPoly>,
}

/// A compiled list of expressions over a fixed ordering of variables.
#[derive(Clone)]
pub struct Compiled {
    vars: Vec<Symbol>,
    ops: Vec<Op>,
    outputs: Vec<CRat>,
}

struct Builder<'a> {
    vars: &'a [Symbol],
    fns: &'a FnTable,
    missing: Missing,
    slots: HashMap<AtomId, usize>,
    ops: Vec<Op>,
}

impl<'a> Builder<'a> {
    fn slot(&mut self, id: AtomId) -> Result<usize, ExprError> {
        if let Some(&s) = self.slots.get(&id) {
            return Ok(s);
        }
        let op = match &*atom::lookup(id) {
            Atom::Var(name) => {
                let k = self
                    .vars
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| ExprError::UnboundVariable(name.to_string()))?;
                Op::Var(k)
            }
            Atom::Pi => Op::Const(Complex64::new(std::f64::consts::PI, 0.0)),
            Atom::Func(f, u) => Op::Func(*f, Box::new(self.rat(u.ratfunc())?)),
            Atom::Root(b, q) => Op::Root(*q, Box::new(self.rat(b.ratfunc())?)),
            Atom::User(u, args) => {
                let imp = match (self.fns.get(u), self.missing) {
                    (Some(f), _) => f.clone(),
                    (None, Missing::Pseudo(seed)) => pseudo_fn(u, seed),
                    (None, Missing::Error) => {
                        return Err(ExprError::MissingFunction(crate::print::user_label(u)))
                    }
                };
                let cargs = args
                    .iter()
                    .map(|a| self.rat(a.ratfunc()))
                    .collect::<Result<_, _>>()?;
                Op::User(imp, cargs)
            }
        };
        let s = self.ops.len();
        self.ops.push(op);
        self.slots.insert(id, s);
        Ok(s)
    }

    fn poly(&mut self, p: &Poly) -> Result<CPoly, ExprError> {
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let mut f = Vec::with_capacity(m.0.len());
            for &(v, e) in m.0.iter() {
                f.push((self.slot(v)?, e));
            }
            terms.push((c.to_c64(), f));
        }
        Ok(CPoly { terms })
    }

    fn rat(&mut self, r: &RatFunc) -> Result<CRat, ExprError> {
        let num = self.poly(r.num())?;
        let den = if r.is_polynomial() {
            None
        } else {
            Some(self.poly(r.den())?)
        };
        Ok(CRat { num, den })
    }
}

/// Deterministic smooth stand-in for an opaque function.
fn pseudo_fn(u: &UserFn, seed: u64) -> NumFn {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    u.hash(&mut h);
    seed.hash(&mut h);
    let bits = h.finish();
    let unit = |k: u32| ((bits.rotate_left(k * 13) & 0xffff) as f64) / 65535.0;
    let (a, b, c, d) = (0.5 + unit(1), 0.5 + unit(2), 2.0 * unit(3), 1.2 + unit(4));
    Arc::new(move |args: &[Complex64]| {
        let mut s = Complex64::new(c, 0.0);
        for (k, x) in args.iter().enumerate() {
            s += x * (b + 0.37 * k as f64);
        }
        s.sin() * a + d
    })
}

fn eval_poly(p: &CPoly, slots: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, f) in &p.terms {
        let mut t = *c;
        for &(s, e) in f {
            t *= slots[s].powu(e);
        }
        acc += t;
    }
    acc
}

struct Run<'a> {
    slots: Vec<Complex64>,
    min_den: f64,
    _p: std::marker::PhantomData<&'a ()>,
}

impl<'a> Run<'a> {
    fn rat(&mut self, r: &CRat) -> Result<Complex64, ExprError> {
        let n = eval_poly(&r.num, &self.slots);
        match &r.den {
            None => Ok(n),
            Some(d) => {
                let dv = eval_poly(d, &self.slots);
                let m = dv.norm();
                self.min_den = self.min_den.min(m);
                if m < POLE_EPS || !m.is_finite() {
                    return Err(ExprError::Pole(m));
                }
                Ok(n / dv)
            }
        }
    }
}

impl Compiled {
    pub fn new(exprs: &[Expr], vars: &[&str], fns: &FnTable) -> Result<Self, ExprError> {
        Self::with_missing(exprs, vars, fns, Missing::Error)
    }

    pub fn with_missing(
        exprs: &[Expr],
        vars: &[&str],
        fns: &FnTable,
        missing: Missing,
    ) -> Result<Self, ExprError> {
        let vars: Vec<Symbol> = vars.iter().map(|&v| Symbol::from(v)).collect();
        let mut b = Builder {
            vars: &vars,
            fns,
            missing,
            slots: HashMap::new(),
            ops: Vec::new(),
        };
        let outputs = exprs
            .iter()
            .map(|e| b.rat(e.ratfunc()))
            .collect::<Result<Vec<_>, _>>()?;
        let ops = b.ops;
        Ok(Compiled { vars, ops, outputs })
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Evaluates all outputs at the point `x` (one value per variable).
    pub fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>, ExprError> {
        self.eval_tracking(x).map(|(v, _)| v)
    }

    /// Like [`Compiled::eval`], also returning the smallest denominator
    /// magnitude met anywhere (including inside function arguments).
    pub fn eval_tracking(&self, x: &[Complex64]) -> Result<(Vec<Complex64>, f64), ExprError> {
        assert_eq!(x.len(), self.vars.len(), "one value per variable");
        let mut run = Run {
            slots: Vec::with_capacity(self.ops.len()),
            min_den: f64::INFINITY,
            _p: Default::default(),
        };
        for op in &self.ops {
            let v = match op {
                Op::Var(k) => x[*k],
                Op::Const(c) => *c,
                Op::Func(f, u) => {
                    let a = run.rat(u)?;
                    apply(*f, a, &mut run.min_den)?
                }
                Op::Root(q, b) => {
                    let a = run.rat(b)?;
                    if *q == 2 {
                        a.sqrt()
                    } else {
                        a.powf(1.0 / *q as f64)
                    }
                }
                Op::User(f, args) => {
                    let vals = args
                        .iter()
                        .map(|a| run.rat(a))
                        .collect::<Result<Vec<_>, _>>()?;
                    f(&vals)
                }
            };
            run.slots.push(v);
        }
        let out = self
            .outputs
            .iter()
            .map(|r| run.rat(r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((out, run.min_den))
    }

    /// Real variables convenience wrapper.
    pub fn eval_real(&self, x: &[f64]) -> Result<Vec<Complex64>, ExprError> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&z)
    }
}

fn apply(f: Func, a: Complex64, min_den: &mut f64) -> Result<Complex64, ExprError> {
    Ok(match f {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => {
            let c = a.cos();
            *min_den = min_den.min(c.norm());
            a.tan()
        }
        Func::Sinh => a.sinh(),
        Func::Cosh => a.cosh(),
        Func::Tanh => a.tanh(),
        Func::Exp => a.exp(),
        Func::Log => {
            *min_den = min_den.min(a.norm());
            if a.norm() < POLE_EPS {
                return Err(ExprError::Pole(a.norm()));
            }
            a.ln()
        }
        Func::Sqrt => a.sqrt(),
    })
}

/// Evaluates `e` with the given variable values and function table.
pub fn eval_numeric(
    e: &Expr,
    bindings: &HashMap<String, Complex64>,
    fns: &FnTable,
) -> Result<Complex64, ExprError> {
    let names: Vec<&str> = bindings.keys().map(String::as_str).collect();
    let c = Compiled::new(std::slice::from_ref(e), &names, fns)?;
    let x: Vec<Complex64> = names.iter().map(|n| bindings[*n]).collect();
    Ok(c.eval(&x)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;

    fn at(e: &str, pts: &[(&str, f64)]) -> Result<Complex64, ExprError> {
        let b = pts
            .iter()
            .map(|(k, v)| (k.to_string(), Complex64::new(*v, 0.0)))
            .collect();
        eval_numeric(&parse(e).unwrap(), &b, &FnTable::new())
    }

    #[test]
    fn polynomial_value() {
        assert_eq!(
            at("x^2+1", &[("x", 2.0)]).unwrap(),
            Complex64::new(5.0, 0.0)
        );
    }

    #[test]
    fn euler_coefficient_at_origin() {
        let v = at("2/(pi*(1+x^2+y^2)^2)", &[("x", 0.0), ("y", 0.0)]).unwrap();
        assert!((v.re - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            at("x+y", &[("x", 1.0)]),
            Err(ExprError::UnboundVariable(_))
        ));
        assert!(matches!(at("1/x", &[("x", 0.0)]), Err(ExprError::Pole(_))));
        assert!(matches!(
            at("A(x)", &[("x", 0.0)]),
            Err(ExprError::MissingFunction(_))
        ));
    }

    #[test]
    fn user_function_table() {
        let fns = FnTable::new()
            .unary("A", 0, |t| t.sin())
            .unary("A", 1, |t| t.cos());
        let mut b = HashMap::new();
        b.insert("t".to_string(), Complex64::new(0.3, 0.0));
        let v = eval_numeric(&parse("A(t) + A'(t)").unwrap(), &b, &fns).unwrap();
        assert!((v.re - (0.3f64.sin() + 0.3f64.cos())).abs() < 1e-15);
    }
}
