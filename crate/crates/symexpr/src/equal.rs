//! Equality testing: exact on the rational fragment, randomized beyond it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{Compiled, FnTable, Missing};
use crate::expr::Expr;

/// Denominators smaller than this at a sample point cause the point to be
/// redrawn.
pub const SAMPLE_POLE_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum Equality {
    /// The canonical forms coincide.
    Exact,
    /// Every sampled point agreed within tolerance.
    Probable { trials: usize },
    /// A sample point where the values differ.
    NotEqual {
        witness: BTreeMap<String, f64>,
        lhs: Complex64,
        rhs: Complex64,
    },
    /// No pole-free sample point could be found.
    Undetermined,
}

impl Equality {
    pub fn is_true(&self) -> bool {
        matches!(self, Equality::Exact | Equality::Probable { .. })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Equality::Exact)
    }
}

#[derive(Clone)]
pub struct EqualOptions {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
    /// Apply the Pythagorean rewrite rules before comparing canonical forms.
    pub trig_rules: bool,
    /// Implementations for opaque functions; symbols without one are replaced
    /// by fixed pseudo-random smooth functions.
    pub fns: FnTable,
}

impl Default for EqualOptions {
    fn default() -> Self {
        EqualOptions {
            trials: 20,
            tol: 1e-8,
            seed: 0x00c0_ffee,
            trig_rules: false,
            fns: FnTable::new(),
        }
    }
}

/// Compares with default options except for `trials` and `tol`.
pub fn equal_sym(a: &Expr, b: &Expr, trials: usize, tol: f64) -> Equality {
    equal_sym_with(
        a,
        b,
        &EqualOptions {
            trials,
            tol,
            ..Default::default()
        },
    )
}

pub fn equal_sym_with(a: &Expr, b: &Expr, opts: &EqualOptions) -> Equality {
    assert!(opts.trials >= 1, "at least one trial");
    let diff = a - b;
    if diff.is_zero() || (opts.trig_rules && diff.trig_reduce().is_zero()) {
        return Equality::Exact;
    }
    let mut vars: Vec<String> = a.free_vars().into_iter().map(|s| s.to_string()).collect();
    for v in b.free_vars() {
        if !vars.iter().any(|w| w.as_str() == &*v) {
            vars.push(v.to_string());
        }
    }
    vars.sort();
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let prog = match Compiled::with_missing(
        &[a.clone(), b.clone()],
        &names,
        &opts.fns,
        Missing::Pseudo(opts.seed),
    ) {
        Ok(p) => p,
        Err(_) => return Equality::Undetermined,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut done = 0;
    let mut attempts = 0;
    while done < opts.trials {
        attempts += 1;
        if attempts > 100 * opts.trials + 100 {
            return Equality::Undetermined;
        }
        let x: Vec<f64> = (0..names.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let (vals, min_den) = match prog.eval_tracking(&z) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if min_den < SAMPLE_POLE_EPS || !vals.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            continue;
        }
        let (va, vb) = (vals[0], vals[1]);
        let scale = va.norm().max(vb.norm());
        let err = (va - vb).norm();
        if err > opts.tol * scale && err > f64::MIN_POSITIVE {
            let witness = names
                .iter()
                .zip(x.iter())
                .map(|(n, v)| (n.to_string(), *v))
                .collect();
            return Equality::NotEqual {
                witness,
                lhs: va,
                rhs: vb,
            };
        }
        done += 1;
    }
    Equality::Probable { trials: done }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;

    #[test]
    fn pythagorean_identity() {
        let a = parse("sin(x)^2 + cos(x)^2").unwrap();
        let one = Expr::one();
        assert!(matches!(
            equal_sym(&a, &one, 20, 1e-10),
            Equality::Probable { .. }
        ));
        let opts = EqualOptions {
            trig_rules: true,
            ..Default::default()
        };
        assert!(equal_sym_with(&a, &one, &opts).is_exact());
    }

    #[test]
    fn inequality_has_witness() {
        let x = Expr::var("x");
        match equal_sym(&x, &(&x + &Expr::one()), 5, 1e-8) {
            Equality::NotEqual { witness, .. } => assert!(witness.contains_key("x")),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn exact_on_rational_fragment() {
        let a = parse("I/(2*(pi + pi*z^2*zbar^2 + 2*pi*z*zbar))").unwrap();
        let b = parse("I/(2*pi*(1+z*zbar)^2)").unwrap();
        assert!(equal_sym(&a, &b, 1, 1e-12).is_exact());
    }
}
