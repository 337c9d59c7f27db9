//! Invariant polynomials: Pfaffian, determinant and trace laws, numerically
//! and symbolically, including over the ring of even forms.

mod common;

use chernweil::charclass::{invariant_det, invariant_pfaffian};
use chernweil::forms::{Coframe, DiffForm, MixedForm};
use chernweil::geometry::Manifold;
use chernweil::matrix::{det, mul, pfaffian, trace, transpose};
use common::{p, pf_by_permutations, rel, rng, skew, square};
use proptest::prelude::*;
use symexpr::Expr;

fn symbolic_skew(n: usize) -> Vec<Vec<Expr>> {
    let mut a = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            a[i][j] = Expr::var(&format!("a{}_{}", i, j));
            a[j][i] = -a[i][j].clone();
        }
    }
    a
}

#[test]
fn pfaffian_matches_permutation_sum() {
    for n in [2, 4, 6] {
        let a = symbolic_skew(n);
        assert_eq!(pfaffian(&a), pf_by_permutations(&a), "size {}", n);
        assert_eq!(pfaffian(&a).mul_ref(&pfaffian(&a)), det(&a), "size {}", n);
    }
}

#[test]
fn pfaffian_congruence_symbolic() {
    let a = symbolic_skew(4);
    let h: Vec<Vec<Expr>> = (0..4)
        .map(|i| (0..4).map(|j| Expr::var(&format!("h{}{}", i, j))).collect())
        .collect();
    let b = mul(&mul(&h, &a), &transpose(&h));
    assert_eq!(pfaffian(&b), det(&h).mul_ref(&pfaffian(&a)));
}

#[test]
fn numeric_pfaffian_laws() {
    let mut r = rng(7);
    for n in [4, 6] {
        for _ in 0..100 {
            let x = skew(&mut r, n);
            let pf = pfaffian(&x);
            assert!(rel(pf * pf, det(&x)) < 1e-9);
            let h = square(&mut r, n);
            let y = mul(&mul(&h, &x), &transpose(&h));
            assert!(rel(pfaffian(&y), det(&h) * pf) < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn det_is_multiplicative(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let (a, b) = (square(&mut r, n), square(&mut r, n));
        let lhs = det(&mul(&a, &b));
        let rhs = det(&a) * det(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn trace_is_conjugation_invariant(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let (a, b) = (square(&mut r, n), square(&mut r, n));
        let ab = trace(&mul(&a, &b));
        let ba = trace(&mul(&b, &a));
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
    }
}

/// `Pf² = det` holds in the commutative ring of even forms too.
#[test]
fn pfaffian_squares_to_det_on_two_forms() {
    let mut m = Manifold::new("R4", 4);
    m.add_chart("X", "R4", &["x", "y", "z", "w"], vec![])
        .unwrap();
    let cof = Coframe::coordinate(m.chart("X").unwrap());
    let two = |s: &[(usize, usize, &str)]| {
        MixedForm::homogeneous(
            DiffForm::from_components(&cof, 2, s.iter().map(|&(i, j, e)| (vec![i, j], p(e))))
                .unwrap(),
        )
    };
    let entries = [
        (0, 1, two(&[(0, 1, "x"), (2, 3, "1")])),
        (0, 2, two(&[(0, 2, "y^2"), (1, 3, "z")])),
        (0, 3, two(&[(0, 3, "3"), (1, 2, "x*w")])),
        (1, 2, two(&[(0, 1, "w"), (0, 3, "1 + y")])),
        (1, 3, two(&[(1, 2, "x - z")])),
        (2, 3, two(&[(0, 2, "2"), (2, 3, "y")])),
    ];
    let mut a = vec![vec![MixedForm::zero(&cof); 4]; 4];
    for (i, j, f) in entries {
        a[j][i] = f.neg();
        a[i][j] = f;
    }
    let pf = invariant_pfaffian(&a).unwrap();
    assert_eq!(pf.mul(&pf).unwrap(), invariant_det(&a));
    assert!(!pf.is_zero());
}
