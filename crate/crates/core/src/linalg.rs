//! Dense least squares by column-pivoted Householder QR.

use crate::error::{Error, Result};

/// Relative rank tolerance, scaled by the largest column norm.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// `‖b - A x‖₂`, recomputed from the original columns.
    pub residual_norm: f64,
}

/// Solves `min ‖A x - b‖₂` where `A` is given by its columns.
///
/// A column whose remaining norm after elimination of the pivots chosen so
/// far falls below `RANK_TOLERANCE * max column norm` makes the system
/// rank-deficient; the error lists the indices (into `columns`) that were
/// left unpivoted.
pub fn lstsq(columns: &[&[f64]], b: &[f64]) -> Result<LeastSquares> {
    let n = columns.len();
    let m = b.len();
    if columns.iter().any(|c| c.len() != m) {
        return Err(Error::invalid("columns and right-hand side differ in length"));
    }
    if n == 0 {
        return Ok(LeastSquares {
            coefficients: vec![],
            residual_norm: norm(b),
        });
    }
    if m < n {
        return Err(Error::Underdetermined { rows: m, columns: n });
    }

    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let max_norm = a.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let tol = RANK_TOLERANCE * max_norm;
    let mut diag = vec![0.0; n];

    for k in 0..n {
        // pivot: largest trailing norm among the remaining columns
        let (p, pnorm) = (k..n)
            .map(|j| (j, norm(&a[j][k..])))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pnorm <= tol {
            let mut dependent: Vec<usize> = perm[k..].to_vec();
            dependent.sort_unstable();
            return Err(Error::DegenerateRegression { columns: dependent });
        }
        a.swap(k, p);
        perm.swap(k, p);

        let x0 = a[k][k];
        let alpha = if x0 >= 0.0 { -pnorm } else { pnorm };
        let mut v = a[k][k..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        diag[k] = alpha;
        if vv > 0.0 {
            for col in a.iter_mut().skip(k + 1) {
                reflect(&v, vv, &mut col[k..]);
            }
            reflect(&v, vv, &mut rhs[k..]);
        }
    }

    // back substitution on R x = Qᵀ b
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= a[j][k] * x[j];
        }
        x[k] = s / diag[k];
    }
    let mut coefficients = vec![0.0; n];
    for (k, &orig) in perm.iter().enumerate() {
        coefficients[orig] = x[k];
    }

    let mut r = b.to_vec();
    for (c, &coef) in columns.iter().zip(&coefficients) {
        for (ri, ci) in r.iter_mut().zip(c.iter()) {
            *ri -= coef * ci;
        }
    }
    Ok(LeastSquares {
        coefficients,
        residual_norm: norm(&r),
    })
}

fn reflect(v: &[f64], vv: f64, y: &mut [f64]) {
    let dot: f64 = v.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    let s = 2.0 * dot / vv;
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= s * vi;
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}
