//! A small computer-algebra core.
//!
//! Expressions are kept as reduced rational functions over the Gaussian
//! rationals in a set of atoms: variables, `pi`, elementary functions of
//! canonical arguments, roots and opaque user functions with formal
//! derivatives. Zero testing is exact on that fragment; [`equal_sym`] adds
//! randomized testing for identities between the transcendental atoms.
//!
//! ```
//! use symexpr::parse;
//!
//! let e = parse("zbar/(1+z*zbar)").unwrap();
//! assert_eq!(e.diff("zbar"), parse("1/(1+z*zbar)^2").unwrap());
//! assert_eq!(e.diff("zbar").to_string(), "1/(z*zbar + 1)^2");
//! ```

mod atom;
mod coeff;
mod diff;
mod equal;
mod error;
mod eval;
mod expr;
mod gcd;
mod parse;
mod poly;
mod print;
mod ratfunc;
mod subs;

pub use atom::AtomId;
pub use coeff::Coeff;
pub use equal::{equal_sym, equal_sym_with, EqualOptions, Equality, SAMPLE_POLE_EPS};
pub use error::ExprError;
pub use eval::{eval_numeric, Compiled, FnTable, Missing, NumFn, POLE_EPS};
pub use expr::{canonicalize, Expr, Func, Node, Symbol, UserFn};
pub use parse::{parse, parse_with, ParseContext};
pub use poly::{Mono, Poly};
pub use print::user_label;
pub use ratfunc::RatFunc;

pub use num_complex::Complex64;
pub use num_rational::BigRational;

/// Differentiates with respect to a variable.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    e.diff(var)
}
