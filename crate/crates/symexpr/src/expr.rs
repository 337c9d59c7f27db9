//! The public expression type.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::atom::{self, Atom, AtomId};
use crate::coeff::Coeff;
use crate::error::ExprError;
use crate::poly::{Mono, Poly};
use crate::ratfunc::RatFunc;

pub type Symbol = Arc<str>;

/// Elementary functions known to the system.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }

    fn is_odd(self) -> bool {
        matches!(self, Func::Sin | Func::Tan | Func::Sinh | Func::Tanh)
    }

    fn is_even(self) -> bool {
        matches!(self, Func::Cos | Func::Cosh)
    }
}

/// An opaque function symbol with partial-derivative orders, one per argument.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct UserFn {
    pub name: Symbol,
    pub derivs: Vec<u32>,
}

impl UserFn {
    pub fn new(name: &str, arity: usize) -> Self {
        UserFn {
            name: Arc::from(name),
            derivs: vec![0; arity],
        }
    }

    pub fn arity(&self) -> usize {
        self.derivs.len()
    }

    pub fn total_order(&self) -> u32 {
        self.derivs.iter().sum()
    }

    /// The same symbol differentiated once more in argument `k`.
    pub fn differentiated(&self, k: usize) -> UserFn {
        let mut u = self.clone();
        u.derivs[k] += 1;
        u
    }
}

/// Structural view of an expression, one level deep.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Rational(BigRational),
    Pi,
    I,
    Var(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, BigRational),
    Func(Func, Expr),
    User(UserFn, Vec<Expr>),
}

/// An immutable expression held in canonical form.
///
/// Every constructor canonicalises, so structural equality and hashing
/// coincide with equality of canonical forms. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<RatFunc>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::print::to_plain(&self.0))
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl From<RatFunc> for Expr {
    fn from(r: RatFunc) -> Self {
        Expr(Arc::new(reduce_roots(r)))
    }
}

fn root_of(id: AtomId) -> Option<(Expr, u32)> {
    match &*atom::lookup(id) {
        Atom::Root(b, q) => Some((b.clone(), *q)),
        _ => None,
    }
}

/// Applies `root(b, q)^q = b` and clears root factors that divide the
/// denominator as a monomial.
fn reduce_roots(r: RatFunc) -> RatFunc {
    if !atom::roots_present() {
        return r;
    }
    let mut r = r;
    for _ in 0..8 {
        let mut num = r.num().clone();
        let mut den = r.den().clone();
        let mut changed = false;
        for &(id, e) in den.mono_content().0.iter() {
            if let Some((_, q)) = root_of(id) {
                let k = q - e % q;
                if k != q {
                    let m = Mono::var(id, k);
                    num = num.mul_mono(&m, &Coeff::one());
                    den = den.mul_mono(&m, &Coeff::one());
                    changed = true;
                }
            }
        }
        let needs = |p: &Poly| {
            p.vars()
                .into_iter()
                .any(|id| matches!(root_of(id), Some((_, q)) if p.degree_in(id) >= q))
        };
        if !changed && !needs(&num) && !needs(&den) {
            return r;
        }
        let n = lower_root_powers(&num);
        let d = lower_root_powers(&den);
        r = n
            .checked_div(&d)
            .expect("root reduction keeps the denominator nonzero");
    }
    r
}

fn lower_root_powers(p: &Poly) -> RatFunc {
    let mut acc = RatFunc::from_poly(p.clone());
    for id in p.vars() {
        let (b, q) = match root_of(id) {
            Some(x) => x,
            None => continue,
        };
        if p.degree_in(id) < q {
            continue;
        }
        // acc is still polynomial in this atom; rewrite its powers
        let (n, d) = (acc.num().clone(), acc.den().clone());
        let mut out = RatFunc::zero();
        for (k, c) in n.to_univariate(id).into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = k as u32;
            let t = &RatFunc::from_poly(&c * &Poly::atom(id).pow(k % q))
                * &b.ratfunc().powi((k / q) as i32).expect("positive power");
            out = &out + &t;
        }
        acc = out
            .checked_div(&RatFunc::from_poly(d))
            .expect("nonzero denominator");
    }
    acc
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl Expr {
    pub fn zero() -> Self {
        RatFunc::zero().into()
    }

    pub fn one() -> Self {
        RatFunc::one().into()
    }

    pub fn int(n: i64) -> Self {
        RatFunc::from_int(n).into()
    }

    /// `n/d`; panics when `d == 0`.
    pub fn rational(n: i64, d: i64) -> Self {
        RatFunc::constant(Coeff::from_ratio(n, d)).into()
    }

    pub fn from_rational(r: BigRational) -> Self {
        RatFunc::constant(Coeff::from_rational(r)).into()
    }

    pub fn from_coeff(c: Coeff) -> Self {
        RatFunc::constant(c).into()
    }

    pub fn i() -> Self {
        RatFunc::constant(Coeff::i()).into()
    }

    pub fn pi() -> Self {
        Expr::atom(atom::pi_id())
    }

    pub fn var(name: &str) -> Self {
        Expr::atom(atom::var_id(name))
    }

    pub fn var_sym(name: Symbol) -> Self {
        Expr::atom(atom::intern(Atom::Var(name)))
    }

    pub(crate) fn atom(id: AtomId) -> Self {
        RatFunc::from_poly(Poly::atom(id)).into()
    }

    pub fn ratfunc(&self) -> &RatFunc {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Exact constant value in `Q(i)`, if the expression has no atoms.
    pub fn as_coeff(&self) -> Option<Coeff> {
        self.0.as_constant()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_coeff().and_then(|c| c.as_rational().cloned())
    }

    pub fn as_i64(&self) -> Option<i64> {
        self.as_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.numer().to_i64())
    }

    /// If the expression is a bare variable, its name.
    pub fn as_var(&self) -> Option<Symbol> {
        let id = self.as_atom()?;
        match &*atom::lookup(id) {
            Atom::Var(s) => Some(s.clone()),
            _ => None,
        }
    }

    pub(crate) fn as_atom(&self) -> Option<AtomId> {
        if !self.0.is_polynomial() {
            return None;
        }
        match self.0.num().terms() {
            [(m, c)] if c.is_one() && m.0.len() == 1 && m.0[0].1 == 1 => Some(m.0[0].0),
            _ => None,
        }
    }

    /// No free variables (π, `I` and functions of constants are allowed).
    pub fn is_constant(&self) -> bool {
        let r = &self.0;
        r.num()
            .vars()
            .iter()
            .chain(r.den().vars().iter())
            .all(|&id| atom::lookup(id).is_constant())
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Symbol>) {
        let r = &self.0;
        for id in r.num().vars().into_iter().chain(r.den().vars()) {
            atom::lookup(id).free_vars(out);
        }
    }

    /// Free variables, sorted by name.
    pub fn free_vars(&self) -> Vec<Symbol> {
        let mut v = Vec::new();
        self.collect_vars(&mut v);
        v.sort();
        v
    }

    pub fn depends_on(&self, name: &str) -> bool {
        self.free_vars().iter().any(|s| &**s == name)
    }

    /// Names of opaque functions (with derivative orders) occurring anywhere.
    pub fn user_functions(&self) -> Vec<UserFn> {
        let mut out = Vec::new();
        fn walk(e: &Expr, out: &mut Vec<UserFn>) {
            let r = e.ratfunc();
            for id in r.num().vars().into_iter().chain(r.den().vars()) {
                match &*atom::lookup(id) {
                    Atom::User(u, args) => {
                        if !out.contains(u) {
                            out.push(u.clone());
                        }
                        args.iter().for_each(|a| walk(a, out));
                    }
                    Atom::Func(_, a) | Atom::Root(a, _) => walk(a, out),
                    _ => {}
                }
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn checked_div(&self, o: &Expr) -> Result<Expr, ExprError> {
        Ok(self.0.checked_div(&o.0)?.into())
    }

    pub fn powi(&self, e: i32) -> Result<Expr, ExprError> {
        Ok(self.0.powi(e)?.into())
    }

    /// `self^r` for a rational exponent; non-integer powers introduce root
    /// kernels (principal branch).
    pub fn pow_rational(&self, r: BigRational) -> Result<Expr, ExprError> {
        if r.is_integer() {
            let e = r.numer().to_i32().ok_or(ExprError::NonConstantExponent)?;
            return self.powi(e);
        }
        let q = r.denom().to_u32().ok_or(ExprError::NonConstantExponent)?;
        let p = r.numer().clone();
        let n = p.div_floor_big(&BigInt::from(q));
        let rem = (&p - &n * BigInt::from(q))
            .to_i32()
            .expect("remainder below q");
        let n = n.to_i32().ok_or(ExprError::NonConstantExponent)?;
        let root = Expr::root(self, q)?;
        Ok(self.powi(n)?.mul_ref(&root.powi(rem)?))
    }

    /// `self^e` where `e` must canonicalise to a rational constant.
    pub fn pow(&self, e: &Expr) -> Result<Expr, ExprError> {
        let r = e.as_rational().ok_or(ExprError::NonConstantExponent)?;
        self.pow_rational(r)
    }

    /// Principal `q`-th root.
    pub fn root(base: &Expr, q: u32) -> Result<Expr, ExprError> {
        assert!(q >= 2);
        if base.is_zero() || base.is_one() {
            return Ok(base.clone());
        }
        if let Some(r) = base.as_rational() {
            if let Some(v) = exact_root(&r.abs(), q) {
                if !r.is_negative() {
                    return Ok(Expr::from_rational(v));
                }
                if q == 2 {
                    return Ok(Expr::from_rational(v).mul_ref(&Expr::i()));
                }
                if q % 2 == 1 {
                    return Ok(Expr::from_rational(-v));
                }
            }
        }
        Ok(Expr::atom(atom::intern(Atom::Root(base.clone(), q))))
    }

    pub fn sqrt(&self) -> Expr {
        Expr::root(self, 2).expect("square root of a nonzero-exponent base")
    }

    /// Applies an elementary function, folding exact special values and
    /// normalising the sign of arguments of odd and even functions.
    pub fn func(f: Func, arg: Expr) -> Expr {
        if f == Func::Sqrt {
            return arg.sqrt();
        }
        if arg.is_zero() {
            return match f {
                Func::Cos | Func::Cosh | Func::Exp => Expr::one(),
                Func::Log => Expr::atom(atom::intern(Atom::Func(f, arg))),
                _ => Expr::zero(),
            };
        }
        if f == Func::Log && arg.is_one() {
            return Expr::zero();
        }
        if (f.is_odd() || f.is_even()) && prefers_negation(&arg) {
            let inner = Expr::atom(atom::intern(Atom::Func(f, -&arg)));
            return if f.is_odd() { -&inner } else { inner };
        }
        Expr::atom(atom::intern(Atom::Func(f, arg)))
    }

    pub fn sin(&self) -> Expr {
        Expr::func(Func::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        Expr::func(Func::Cos, self.clone())
    }
    pub fn tan(&self) -> Expr {
        Expr::func(Func::Tan, self.clone())
    }
    pub fn sinh(&self) -> Expr {
        Expr::func(Func::Sinh, self.clone())
    }
    pub fn cosh(&self) -> Expr {
        Expr::func(Func::Cosh, self.clone())
    }
    pub fn tanh(&self) -> Expr {
        Expr::func(Func::Tanh, self.clone())
    }
    pub fn exp(&self) -> Expr {
        Expr::func(Func::Exp, self.clone())
    }
    pub fn log(&self) -> Expr {
        Expr::func(Func::Log, self.clone())
    }

    /// Applies an opaque function symbol. Panics on an arity mismatch.
    pub fn user(f: UserFn, args: Vec<Expr>) -> Expr {
        assert_eq!(f.arity(), args.len(), "arity of `{}`", f.name);
        Expr::atom(atom::intern(Atom::User(f, args)))
    }

    /// Undifferentiated opaque function applied to `args`.
    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        let f = UserFn::new(name, args.len());
        Expr::user(f, args)
    }

    pub fn add_ref(&self, o: &Expr) -> Expr {
        (&*self.0 + &*o.0).into()
    }

    pub fn sub_ref(&self, o: &Expr) -> Expr {
        (&*self.0 - &*o.0).into()
    }

    pub fn mul_ref(&self, o: &Expr) -> Expr {
        (&*self.0 * &*o.0).into()
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        self.0.scale(c).into()
    }

    /// Derivative with respect to the variable `name`.
    pub fn diff(&self, name: &str) -> Expr {
        crate::diff::diff(&self.0, atom::var_id(name)).into()
    }

    /// Simultaneous substitution of variables.
    pub fn subs(&self, map: &HashMap<Symbol, Expr>) -> Result<Expr, ExprError> {
        crate::subs::subs(self, map)
    }

    pub fn subs_var(&self, name: &str, value: &Expr) -> Result<Expr, ExprError> {
        let mut m = HashMap::new();
        m.insert(Symbol::from(name), value.clone());
        self.subs(&m)
    }

    /// Complex conjugate, treating every variable and opaque function as real.
    pub fn conj(&self) -> Expr {
        crate::subs::conj(self)
    }

    /// Rewrites `cos^2 → 1 - sin^2` and `cosh^2 → 1 + sinh^2`, which makes the
    /// Pythagorean identities decidable by canonical comparison.
    pub fn trig_reduce(&self) -> Expr {
        crate::subs::trig_reduce(self)
    }

    pub fn to_latex(&self) -> String {
        crate::print::to_latex(&self.0)
    }

    /// One-level structural view.
    pub fn node(&self) -> Node {
        let r = &*self.0;
        if !r.is_polynomial() {
            let num: Expr = RatFunc::from_poly(r.num().clone()).into();
            let den: Expr = RatFunc::from_poly(r.den().clone()).into();
            if num.is_one() {
                return Node::Pow(den, -BigRational::one());
            }
            let recip: Expr = RatFunc::new(Poly::one(), r.den().clone())
                .expect("nonzero")
                .into();
            return Node::Product(vec![num, recip]);
        }
        let terms = r.num().terms();
        match terms.len() {
            0 => Node::Rational(BigRational::zero()),
            1 => {
                let (m, c) = &terms[0];
                if m.is_one() {
                    return match c.as_rational() {
                        Some(q) => Node::Rational(q.clone()),
                        None if c.re.is_zero() && c.im.is_one() => Node::I,
                        None => {
                            let mut v = Vec::new();
                            if !c.re.is_zero() {
                                return Node::Sum(vec![
                                    Expr::from_rational(c.re.clone()),
                                    Expr::from_coeff(Coeff::new(BigRational::zero(), c.im.clone())),
                                ]);
                            }
                            if !c.im.is_one() {
                                v.push(Expr::from_rational(c.im.clone()));
                            }
                            v.push(Expr::i());
                            Node::Product(v)
                        }
                    };
                }
                if c.is_one() && m.0.len() == 1 {
                    let (id, e) = m.0[0];
                    if e == 1 {
                        return atom_node(id);
                    }
                    return Node::Pow(Expr::atom(id), BigRational::from_integer(e.into()));
                }
                let mut f = Vec::new();
                if !c.is_one() {
                    f.push(Expr::from_coeff(c.clone()));
                }
                for &(id, e) in m.0.iter() {
                    f.push(
                        RatFunc::from_poly(Poly::monomial(Mono::var(id, e), Coeff::one())).into(),
                    );
                }
                Node::Product(f)
            }
            _ => Node::Sum(
                terms
                    .iter()
                    .map(|(m, c)| RatFunc::from_poly(Poly::monomial(m.clone(), c.clone())).into())
                    .collect(),
            ),
        }
    }
}

fn atom_node(id: AtomId) -> Node {
    match &*atom::lookup(id) {
        Atom::Var(s) => Node::Var(s.clone()),
        Atom::Pi => Node::Pi,
        Atom::Func(f, a) => Node::Func(*f, a.clone()),
        Atom::Root(a, 2) => Node::Func(Func::Sqrt, a.clone()),
        Atom::Root(a, q) => Node::Pow(a.clone(), BigRational::new(1.into(), (*q as i64).into())),
        Atom::User(u, args) => Node::User(u.clone(), args.clone()),
    }
}

trait DivFloorBig {
    fn div_floor_big(&self, d: &BigInt) -> BigInt;
}

impl DivFloorBig for BigInt {
    fn div_floor_big(&self, d: &BigInt) -> BigInt {
        num_integer::Integer::div_floor(self, d)
    }
}

fn exact_root(r: &BigRational, q: u32) -> Option<BigRational> {
    let n = r.numer().nth_root(q);
    let d = r.denom().nth_root(q);
    if num_traits::pow(n.clone(), q as usize) == *r.numer()
        && num_traits::pow(d.clone(), q as usize) == *r.denom()
    {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Deterministic choice between `u` and `-u` as a function argument: prefer
/// the one whose printed form does not start with a minus sign.
fn prefers_negation(u: &Expr) -> bool {
    let a = u.to_string();
    if !a.starts_with('-') {
        return false;
    }
    let b = (-u).to_string();
    !b.starts_with('-') || b < a
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        self.add_ref(o)
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        self.sub_ref(o)
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        self.mul_ref(o)
    }
}

/// Panics on division by an expression that canonicalises to zero; use
/// [`Expr::checked_div`] to handle that case.
impl<'a> Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn div(self, o: &Expr) -> Expr {
        self.checked_div(o).expect("division by zero expression")
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        (-&*self.0).into()
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                self.$m(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::one(), |a, b| a * b)
    }
}

/// Returns the canonical form. Expressions are always stored canonically, so
/// this is the identity; it exists for callers that want to be explicit.
pub fn canonicalize(e: &Expr) -> Expr {
    e.clone()
}
