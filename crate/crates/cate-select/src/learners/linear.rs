//! Penalized linear regression. Ridge solves the normal equations in
//! closed form; lasso runs cyclic coordinate descent. Both standardize
//! features with (weighted) train-set statistics and keep the intercept
//! unpenalized.

use crate::error::{Error, Result};
use crate::numeric::{solve_spd, Standardizer};
use ndarray::{Array2, ArrayView2};

#[derive(Debug, Clone)]
pub(crate) struct LinearOptions {
    pub standardize: bool,
    pub intercept: bool,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions { standardize: true, intercept: true }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LinearModel {
    standardizer: Standardizer,
    /// Coefficients on the (possibly standardized) feature scale.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let xs = self.standardizer.transform(x);
        xs.rows()
            .into_iter()
            .map(|r| r.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>() + self.intercept)
            .collect()
    }
}

fn prepare(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    opts: &LinearOptions,
) -> (Array2<f64>, Vec<f64>, Vec<f64>, Standardizer, f64) {
    let n = x.nrows();
    let w: Vec<f64> = weights.map(|v| v.to_vec()).unwrap_or_else(|| vec![1.0; n]);
    let standardizer = if opts.standardize {
        Standardizer::fit(x, Some(&w))
    } else {
        Standardizer::identity(x.ncols())
    };
    let xs = standardizer.transform(x);
    let y_mean = if opts.intercept {
        let sw: f64 = w.iter().sum();
        y.iter().zip(&w).map(|(yi, wi)| yi * wi).sum::<f64>() / sw
    } else {
        0.0
    };
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    (xs, yc, w, standardizer, y_mean)
}

/// Ridge: minimizes `Σ wᵢ (yᵢ − f(xᵢ))² + α ‖β‖²` (intercept excluded from
/// the penalty). The grid excludes α = 0 so the system stays positive
/// definite.
pub(crate) fn fit_ridge_raw(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    alpha: f64,
    opts: &LinearOptions,
) -> Result<LinearModel> {
    if alpha <= 0.0 {
        return Err(Error::invalid("ridge requires alpha > 0 (the grid excludes 0)"));
    }
    let d = x.ncols();
    let (xs, yc, w, standardizer, y_mean) = prepare(x, y, weights, opts);

    // A = Xᵀ W X + α I,  b = Xᵀ W y
    let mut a = Array2::<f64>::zeros((d, d));
    let mut b = vec![0.0; d];
    for (i, row) in xs.rows().into_iter().enumerate() {
        let wi = w[i];
        for j in 0..d {
            let xj = row[j] * wi;
            b[j] += xj * yc[i];
            for k in j..d {
                a[[j, k]] += xj * row[k];
            }
        }
    }
    for j in 0..d {
        for k in 0..j {
            a[[j, k]] = a[[k, j]];
        }
        a[[j, j]] += alpha;
    }
    let coefficients = solve_spd(&a, &b)?;

    // With weighted standardization, standardized features have weighted
    // mean zero, so the unpenalized intercept is just the weighted y mean.
    let intercept = if opts.intercept {
        if opts.standardize {
            y_mean
        } else {
            let sw: f64 = w.iter().sum();
            let xw_means: Vec<f64> = (0..d)
                .map(|j| xs.column(j).iter().zip(&w).map(|(v, wi)| v * wi).sum::<f64>() / sw)
                .collect();
            y_mean - xw_means.iter().zip(&coefficients).map(|(m, c)| m * c).sum::<f64>()
        }
    } else {
        0.0
    };
    Ok(LinearModel { standardizer, coefficients, intercept })
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Lasso: minimizes `(1/(2 Σw)) Σ wᵢ (yᵢ − f(xᵢ))² + α ‖β‖₁` by cyclic
/// coordinate descent, stopping when the largest coefficient change in a
/// sweep falls below 1e−6 or after `max_iter` sweeps.
pub(crate) fn fit_lasso_raw(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    alpha: f64,
    max_iter: usize,
    opts: &LinearOptions,
) -> Result<LinearModel> {
    if alpha <= 0.0 {
        return Err(Error::invalid("lasso requires alpha > 0"));
    }
    const TOL: f64 = 1e-6;
    let d = x.ncols();
    let (xs, yc, w, standardizer, y_mean) = prepare(x, y, weights, opts);
    let sw: f64 = w.iter().sum();
    let omega: Vec<f64> = w.iter().map(|v| v / sw).collect();

    // z_j = Σ ω x_j²; equals 1 on standardized features but computed
    // explicitly so the unstandardized path stays correct.
    let z: Vec<f64> = (0..d)
        .map(|j| xs.column(j).iter().zip(&omega).map(|(v, o)| o * v * v).sum::<f64>())
        .collect();

    let mut beta = vec![0.0; d];
    let mut residual = yc.clone();
    for _sweep in 0..max_iter {
        let mut max_change: f64 = 0.0;
        for j in 0..d {
            if z[j] <= 1e-24 {
                continue;
            }
            let col = xs.column(j);
            let rho: f64 = col.iter().zip(&omega).zip(&residual).map(|((xij, o), r)| o * xij * r).sum::<f64>()
                + z[j] * beta[j];
            let new = soft_threshold(rho, alpha) / z[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for (ri, xij) in residual.iter_mut().zip(col.iter()) {
                    *ri -= xij * delta;
                }
                beta[j] = new;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change < TOL {
            break;
        }
    }

    let intercept = if opts.intercept { y_mean } else { 0.0 };
    Ok(LinearModel { standardizer, coefficients: beta, intercept })
}
