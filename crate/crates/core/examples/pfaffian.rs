//! Invariant polynomials on skew matrices: the Pfaffian squares to the
//! determinant and transforms by det(h) under congruence.

use chernweil::matrix::{det, mul, pfaffian, transpose};
use symexpr::{parse, Expr};

fn main() -> Result<(), symexpr::ExprError> {
    let n = 4;
    let mut a = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = Expr::var(&format!("a{}{}", i + 1, j + 1));
            a[i][j] = v.clone();
            a[j][i] = -v;
        }
    }
    let pf = pfaffian(&a);
    println!("Pf(A) = {}", pf);
    println!("Pf(A)^2 - det(A) = {}", pf.mul_ref(&pf).sub_ref(&det(&a)));

    let h: Vec<Vec<Expr>> = [
        ["1", "t", "0", "0"],
        ["0", "2", "0", "s"],
        ["0", "0", "1", "0"],
        ["u", "0", "0", "1"],
    ]
    .iter()
    .map(|r| r.iter().map(|s| parse(s)).collect::<Result<_, _>>())
    .collect::<Result<_, _>>()?;
    let b = mul(&mul(&h, &a), &transpose(&h));
    println!(
        "Pf(h A h^T) - det(h) Pf(A) = {}",
        pfaffian(&b).sub_ref(&det(&h).mul_ref(&pf))
    );

    let x = [
        [0.0, 1.5, -2.0, 0.3],
        [-1.5, 0.0, 0.7, 1.1],
        [2.0, -0.7, 0.0, -0.4],
        [-0.3, -1.1, 0.4, 0.0],
    ];
    let x: Vec<Vec<f64>> = x.iter().map(|r| r.to_vec()).collect();
    println!("numeric: Pf = {:.6}, det = {:.6}", pfaffian(&x), det(&x));
    Ok(())
}
