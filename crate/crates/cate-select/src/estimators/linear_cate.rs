//! Linear-in-covariates effect model fitted on residualized data. Shared by
//! the DML second stage and the R-score base loss, which are the same
//! quadratic problem: minimize Σ (ỹᵢ − t̃ᵢ·(θ₀ + θᵀxᵢ))².

use crate::error::Result;
use crate::numeric::solve_spd;
use ndarray::{Array2, ArrayView2};

#[derive(Debug, Clone)]
pub struct LinearCate {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearCate {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| {
                self.intercept
                    + r.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }
}

/// Exact minimizer via the normal equations `A θ = b` with
/// `A = Σ t̃² z zᵀ + ridge·I`, `b = Σ t̃ ỹ z`, `z = (1, x)`. A zero ridge is
/// attempted as-is; callers that must survive rank deficiency pass a tiny
/// positive ridge.
pub fn fit_residual_cate(
    x: ArrayView2<'_, f64>,
    y_res: &[f64],
    t_res: &[f64],
    ridge: f64,
) -> Result<LinearCate> {
    let n = x.nrows();
    let d = x.ncols();
    debug_assert_eq!(y_res.len(), n);
    debug_assert_eq!(t_res.len(), n);
    let p = d + 1;

    let mut a = Array2::<f64>::zeros((p, p));
    let mut b = vec![0.0; p];
    let mut z = vec![0.0; p];
    for i in 0..n {
        z[0] = 1.0;
        for j in 0..d {
            z[j + 1] = x[[i, j]];
        }
        let w = t_res[i] * t_res[i];
        let ty = t_res[i] * y_res[i];
        for j in 0..p {
            b[j] += ty * z[j];
            let wz = w * z[j];
            for k in j..p {
                a[[j, k]] += wz * z[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            a[[j, k]] = a[[k, j]];
        }
        a[[j, j]] += ridge;
    }

    let theta = solve_spd(&a, &b)?;
    Ok(LinearCate { intercept: theta[0], coefficients: theta[1..].to_vec() })
}
