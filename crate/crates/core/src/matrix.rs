//! Dense matrices over commutative rings: division-free determinant,
//! Pfaffian by perfect matchings, trace, and inversion of scalar matrices.

use symexpr::{Complex64, Expr};

use crate::forms::MixedForm;

pub type Matrix = Vec<Vec<Expr>>;

/// The operations the invariant polynomials need.
pub trait Ring: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

impl Ring for Expr {
    fn zero_like(&self) -> Self {
        Expr::zero()
    }
    fn one_like(&self) -> Self {
        Expr::one()
    }
    fn add(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn sub(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
}

impl Ring for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Ring for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }
}

/// Even mixed forms on a common coframe form a commutative ring.
impl Ring for MixedForm {
    fn zero_like(&self) -> Self {
        MixedForm::zero(self.coframe())
    }
    fn one_like(&self) -> Self {
        MixedForm::one(self.coframe())
    }
    fn add(&self, o: &Self) -> Self {
        self.add_same(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_same(o)
    }
    fn neg(&self) -> Self {
        MixedForm::neg(self)
    }
    fn is_zero(&self) -> bool {
        MixedForm::is_zero(self)
    }
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<R: Clone>(a: &[Vec<R>]) -> Vec<Vec<R>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mul<R: Ring>(a: &[Vec<R>], b: &[Vec<R>]) -> Vec<Vec<R>> {
    let inner = b.len();
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| {
                    let mut acc = row[0].zero_like();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc = acc.add(&row[k].mul(&b[k][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn trace<R: Ring>(a: &[Vec<R>]) -> R {
    let mut acc = a[0][0].zero_like();
    for (i, row) in a.iter().enumerate() {
        acc = acc.add(&row[i]);
    }
    acc
}

/// Determinant without divisions: cofactor expansion up to 4×4, the
/// Berkowitz algorithm beyond.
pub fn det<R: Ring>(a: &[Vec<R>]) -> R {
    assert!(
        !a.is_empty() && a.iter().all(|r| r.len() == a.len()),
        "square matrix"
    );
    if a.len() <= 4 {
        let rows: Vec<usize> = (0..a.len()).collect();
        cofactor(a, 0, &rows)
    } else {
        berkowitz_det(a)
    }
}

/// Expansion along row `r` over the remaining columns `cols`.
fn cofactor<R: Ring>(a: &[Vec<R>], r: usize, cols: &[usize]) -> R {
    if cols.len() == 1 {
        return a[r][cols[0]].clone();
    }
    let mut acc = a[0][0].zero_like();
    for (k, &c) in cols.iter().enumerate() {
        if a[r][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = cofactor(a, r + 1, &rest);
        if minor.is_zero() {
            continue;
        }
        let t = a[r][c].mul(&minor);
        acc = if k % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Characteristic polynomial coefficients of `a` by Berkowitz's
/// algorithm, leading coefficient first.
pub fn charpoly<R: Ring>(a: &[Vec<R>]) -> Vec<R> {
    let one = a[0][0].one_like();
    let zero = a[0][0].zero_like();
    let mut v = vec![one.clone(), a[0][0].neg()];
    for r in 1..a.len() {
        // column r above the diagonal, row r left of it
        let col: Vec<R> = (0..r).map(|i| a[i][r].clone()).collect();
        let row: Vec<R> = a[r][..r].to_vec();
        let mut t = vec![one.clone(), a[r][r].neg()];
        let mut x = col;
        for _ in 0..r {
            let mut s = zero.clone();
            for (ri, xi) in row.iter().zip(&x) {
                if !ri.is_zero() && !xi.is_zero() {
                    s = s.add(&ri.mul(xi));
                }
            }
            t.push(s.neg());
            x = (0..r)
                .map(|i| {
                    let mut s = zero.clone();
                    for (j, xj) in x.iter().enumerate() {
                        if !a[i][j].is_zero() && !xj.is_zero() {
                            s = s.add(&a[i][j].mul(xj));
                        }
                    }
                    s
                })
                .collect();
        }
        v = (0..r + 2)
            .map(|i| {
                let mut s = zero.clone();
                for (j, vj) in v.iter().enumerate().take(i + 1) {
                    if !t[i - j].is_zero() && !vj.is_zero() {
                        s = s.add(&t[i - j].mul(vj));
                    }
                }
                s
            })
            .collect();
    }
    v
}

fn berkowitz_det<R: Ring>(a: &[Vec<R>]) -> R {
    let n = a.len();
    let c = charpoly(a).pop().unwrap();
    if n.is_multiple_of(2) {
        c
    } else {
        c.neg()
    }
}

/// Pfaffian of a skew matrix as the signed sum over perfect matchings,
/// expanding along the first remaining index.
pub fn pfaffian<R: Ring>(a: &[Vec<R>]) -> R {
    assert!(a.len().is_multiple_of(2), "even dimension");
    let idx: Vec<usize> = (0..a.len()).collect();
    if idx.is_empty() {
        panic!("empty matrix");
    }
    pf_rec(a, &idx)
}

fn pf_rec<R: Ring>(a: &[Vec<R>], idx: &[usize]) -> R {
    if idx.is_empty() {
        return a[0][0].one_like();
    }
    let i = idx[0];
    let mut acc = a[0][0].zero_like();
    for (k, &j) in idx.iter().enumerate().skip(1) {
        if a[i][j].is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != j).collect();
        let sub = pf_rec(a, &rest);
        if sub.is_zero() {
            continue;
        }
        let t = a[i][j].mul(&sub);
        // j sits at position k; moving it next to i takes k-1 transpositions
        acc = if k % 2 == 1 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Inverse by adjugate over the determinant; `None` when singular.
pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let d = det(a);
    if d.is_zero() {
        return None;
    }
    if n == 1 {
        return Some(vec![vec![Expr::one().checked_div(&d).ok()?]]);
    }
    let mut inv = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Matrix = (0..n)
                .filter(|&r| r != i)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != j)
                        .map(|c| a[r][c].clone())
                        .collect()
                })
                .collect();
            let m = det(&minor);
            let m = if (i + j) % 2 == 1 { -m } else { m };
            inv[j][i] = m.checked_div(&d).ok()?;
        }
    }
    Some(inv)
}

pub fn is_identity(a: &Matrix) -> bool {
    a.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, e)| *e == if i == j { Expr::one() } else { Expr::zero() })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use symexpr::parse;

    fn m(rows: &[&[&str]]) -> Matrix {
        rows.iter()
            .map(|r| r.iter().map(|s| parse(s).unwrap()).collect())
            .collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(
            det(&m(&[&["a", "b"], &["c", "d"]])),
            parse("a*d - b*c").unwrap()
        );
        assert_eq!(det(&identity(3)), Expr::one());
    }

    #[test]
    fn berkowitz_agrees_with_cofactor() {
        let a: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                (0..6)
                    .map(|j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + (i == j) as u8 as f64)
                    .collect()
            })
            .collect();
        let small: Vec<Vec<f64>> = a[..4].iter().map(|r| r[..4].to_vec()).collect();
        assert!((berkowitz_det(&small) - det(&small)).abs() < 1e-9);
        // 6x6 against Gaussian elimination
        let mut g = a.clone();
        let mut d = 1.0;
        for c in 0..6 {
            let p = (c..6)
                .max_by(|&x, &y| g[x][c].abs().partial_cmp(&g[y][c].abs()).unwrap())
                .unwrap();
            if p != c {
                g.swap(p, c);
                d = -d;
            }
            d *= g[c][c];
            for r in c + 1..6 {
                let f = g[r][c] / g[c][c];
                for k in c..6 {
                    g[r][k] -= f * g[c][k];
                }
            }
        }
        assert!((det(&a) - d).abs() < 1e-9 * d.abs().max(1.0));
    }

    #[test]
    fn pfaffians() {
        assert_eq!(
            pfaffian(&m(&[&["0", "l"], &["-l", "0"]])),
            parse("l").unwrap()
        );
        let a = m(&[
            &["0", "a", "b", "c"],
            &["-a", "0", "d", "e"],
            &["-b", "-d", "0", "f"],
            &["-c", "-e", "-f", "0"],
        ]);
        assert_eq!(pfaffian(&a), parse("a*f - b*e + c*d").unwrap());
        assert_eq!(pfaffian(&a).mul_ref(&pfaffian(&a)), det(&a));
    }

    #[test]
    fn adjugate_inverse() {
        let a = m(&[&["1", "x"], &["0", "2"]]);
        let inv = inverse(&a).unwrap();
        assert!(is_identity(&mul(&a, &inv)));
        assert!(inverse(&m(&[&["x", "x"], &["1", "1"]])).is_none());
    }
}
