use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Least-squares solution of `min ‖b − Aθ‖₂` by Householder QR.
///
/// `A` must have full column rank; a column whose QR pivot falls below
/// [`RANK_TOLERANCE`](super::RANK_TOLERANCE) relative to the largest pivot (or
/// to its own norm) is reported as a degenerate-design error.
pub fn solve_least_squares(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    let (m, n) = a.dim();
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "matrix has {m} rows but right-hand side has {}",
            b.len()
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares input"));
    }
    if n > m {
        return Err(Error::DegenerateDesign {
            column: m,
            detail: format!("{n} columns but only {m} rows"),
        });
    }

    // Column-major working copy: qr[j] is column j.
    let mut qr: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];
    let mut largest = 0.0f64;

    for k in 0..n {
        let col_norm = qr[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let original_norm = a.column(k).iter().map(|v| v * v).sum::<f64>().sqrt();
        let reference = largest.max(original_norm);
        if !(col_norm > super::RANK_TOLERANCE * reference) {
            return Err(Error::DegenerateDesign {
                column: k,
                detail: format!("QR pivot {col_norm:e} relative to {reference:e}"),
            });
        }
        let alpha = if qr[k][k] > 0.0 { -col_norm } else { col_norm };
        // v = x − alpha e_k, stored in place below the diagonal.
        let mut v = qr[k][k..].to_vec();
        v[0] -= alpha;
        let v_norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if v_norm_sq > 0.0 {
            for col in qr.iter_mut().skip(k + 1) {
                let s: f64 = v.iter().zip(&col[k..]).map(|(x, y)| x * y).sum();
                let f = 2.0 * s / v_norm_sq;
                for (c, vi) in col[k..].iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            }
            let s: f64 = v.iter().zip(&rhs[k..]).map(|(x, y)| x * y).sum();
            let f = 2.0 * s / v_norm_sq;
            for (r, vi) in rhs[k..].iter_mut().zip(&v) {
                *r -= f * vi;
            }
        }
        diag[k] = alpha;
        largest = largest.max(alpha.abs());
    }

    let mut theta = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= qr[j][i] * theta[j];
        }
        theta[i] = s / diag[i];
    }
    Ok(Array1::from(theta))
}
