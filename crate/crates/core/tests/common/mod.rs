#![allow(dead_code)]

use std::path::PathBuf;

use chernweil::scenario::{Model, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symexpr::{parse, Expr};

pub fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

pub fn scn(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(format!("{}.scn", name))
}

pub fn model(name: &str) -> Model {
    Scenario::load(&scn(name)).unwrap().build().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn skew(r: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            a[i][j] = r.gen_range(-1.0..1.0);
            a[j][i] = -a[i][j];
        }
    }
    a
}

pub fn square(r: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..n).map(|_| r.gen_range(-1.0..1.0)).collect())
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Pfaffian from its defining sum over all permutations,
/// `Pf = 1/(2^m m!) Σ sgn(σ) Π a_{σ(2i)σ(2i+1)}`.
pub fn pf_by_permutations(a: &[Vec<Expr>]) -> Expr {
    let n = a.len();
    let m = n / 2;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut acc = Expr::zero();
    permute(&mut perm, 0, &mut |s: &[usize]| {
        let mut t = Expr::int(sgn(s));
        for i in 0..m {
            t = t.mul_ref(&a[s[2 * i]][s[2 * i + 1]]);
        }
        acc = acc.add_ref(&t);
    });
    let norm: i64 = (1..=m as i64).product::<i64>() << m;
    acc.checked_div(&Expr::int(norm)).unwrap()
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

fn sgn(s: &[usize]) -> i64 {
    let mut inv = 0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[i] > s[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

pub mod series {
    use symexpr::BigRational;

    pub type Q = BigRational;

    pub fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    pub fn fact(n: i64) -> i64 {
        (1..=n).product()
    }

    pub fn mul(a: &[Q], b: &[Q]) -> Vec<Q> {
        (0..a.len())
            .map(|k| (0..=k).fold(q(0, 1), |s, i| s + &a[i] * &b[k - i]))
            .collect()
    }

    /// Solves `a * r = 1` coefficient by coefficient.
    pub fn recip(a: &[Q]) -> Vec<Q> {
        let mut r: Vec<Q> = Vec::new();
        for k in 0..a.len() {
            let rhs = if k == 0 { q(1, 1) } else { q(0, 1) };
            let s = (1..=k).fold(q(0, 1), |s, i| s + &a[i] * &r[k - i]);
            r.push((rhs - s) / &a[0]);
        }
        r
    }

    /// Square root with constant term 1, by undetermined coefficients.
    pub fn sqrt(a: &[Q]) -> Vec<Q> {
        let mut r = vec![q(1, 1)];
        for k in 1..a.len() {
            let s = (1..k).fold(q(0, 1), |s, i| s + &r[i] * &r[k - i]);
            r.push((&a[k] - s) / q(2, 1));
        }
        r
    }

    /// x/(1 - e^{-x}) from the reciprocal of Σ (-1)^k x^k/(k+1)!.
    pub fn todd(n: usize) -> Vec<Q> {
        recip(
            &(0..n as i64)
                .map(|k| q(if k % 2 == 0 { 1 } else { -1 }, fact(k + 1)))
                .collect::<Vec<_>>(),
        )
    }

    /// √z/(2 sinh(√z/2)) from the reciprocal of Σ z^k / (4^k (2k+1)!).
    pub fn ahat_z(n: usize) -> Vec<Q> {
        recip(
            &(0..n as i64)
                .map(|k| q(1, 4i64.pow(k as u32) * fact(2 * k + 1)))
                .collect::<Vec<_>>(),
        )
    }

    /// √z/tanh √z = cosh √z · √z/sinh √z.
    pub fn hirzebruch_z(n: usize) -> Vec<Q> {
        let cosh: Vec<Q> = (0..n as i64).map(|k| q(1, fact(2 * k))).collect();
        let sinhc: Vec<Q> = (0..n as i64).map(|k| q(1, fact(2 * k + 1))).collect();
        mul(&cosh, &recip(&sinhc))
    }
}
