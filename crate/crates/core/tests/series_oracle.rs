//! Base-function expansions against a plain rational series oracle built
//! from factorials and a triangular-solve reciprocal.

mod common;

use chernweil::bundle::Field;
use chernweil::charclass::Predefined;
use chernweil::series::{taylor, transform_series, ClassType, PowerSeries};
use common::series::{self as oracle, fact, mul, q, recip, sqrt, Q};
use proptest::prelude::*;
use symexpr::parse;

const N: usize = 5;

fn zero() -> Q {
    q(0, 1)
}

fn todd() -> Vec<Q> {
    oracle::todd(N)
}

fn ahat_z() -> Vec<Q> {
    oracle::ahat_z(N)
}

fn hirzebruch_z() -> Vec<Q> {
    oracle::hirzebruch_z(N)
}

fn expand(name: Predefined) -> Vec<Q> {
    taylor(&name.function(), "x", N - 1)
        .unwrap()
        .rationals()
        .unwrap()
}

#[test]
fn todd_coefficients() {
    assert_eq!(expand(Predefined::Todd), todd());
    assert_eq!(todd(), vec![q(1, 1), q(1, 2), q(1, 12), zero(), q(-1, 720)]);
}

#[test]
fn ahat_z_series() {
    assert_eq!(expand(Predefined::AHat), ahat_z());
    assert_eq!(ahat_z()[..3], [q(1, 1), q(-1, 24), q(7, 5760)]);
}

#[test]
fn hirzebruch_z_series() {
    assert_eq!(expand(Predefined::Hirzebruch), hirzebruch_z());
}

#[test]
fn chern_character_is_exponential() {
    let want: Vec<Q> = (0..N as i64).map(|k| q(1, fact(k))).collect();
    assert_eq!(expand(Predefined::ChernChar), want);
}

/// For real bundles the multiplicative series is √g(x²).
#[test]
fn real_multiplicative_transform() {
    let g = taylor(&Predefined::AHat.function(), "x", N - 1).unwrap();
    let (c, vanished) = transform_series(&g, ClassType::Multiplicative, Field::Real, 8).unwrap();
    assert!(!vanished);
    let z = ahat_z();
    let in_x2: Vec<Q> = (0..N)
        .map(|k| if k % 2 == 0 { z[k / 2].clone() } else { zero() })
        .collect();
    let want = sqrt(&in_x2);
    let got: Vec<Q> = c.iter().map(|e| e.as_rational().unwrap()).collect();
    assert_eq!(got, want);
}

fn small_series() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-9i64..=9, 1i64..=9), N)
}

proptest! {
    #[test]
    fn reciprocal_agrees_with_oracle(mut c in small_series(), a0 in 1i64..=5) {
        c[0] = (a0, 1);
        let s = PowerSeries::from_rationals(&c);
        let want = recip(&c.iter().map(|&(n, d)| q(n, d)).collect::<Vec<_>>());
        prop_assert_eq!(s.reciprocal().unwrap().rationals().unwrap(), want);
    }

    #[test]
    fn product_agrees_with_oracle(a in small_series(), b in small_series()) {
        let (sa, sb) = (PowerSeries::from_rationals(&a), PowerSeries::from_rationals(&b));
        let qa: Vec<Q> = a.iter().map(|&(n, d)| q(n, d)).collect();
        let qb: Vec<Q> = b.iter().map(|&(n, d)| q(n, d)).collect();
        prop_assert_eq!(sa.mul(&sb).rationals().unwrap(), mul(&qa, &qb));
    }

    #[test]
    fn sqrt_squares_back(mut c in small_series()) {
        c[0] = (1, 1);
        let s = PowerSeries::from_rationals(&c);
        let r = s.sqrt().unwrap();
        prop_assert_eq!(r.mul(&r).rationals().unwrap(), s.rationals().unwrap());
    }
}

#[test]
fn taylor_of_composite_function() {
    // e^{sin x} = 1 + x + x²/2 + 0·x³ - x⁴/8
    let s = taylor(&parse("exp(sin(x))").unwrap(), "x", 4).unwrap();
    assert_eq!(
        s.rationals().unwrap(),
        vec![q(1, 1), q(1, 1), q(1, 2), zero(), q(-1, 8)]
    );
}
