//! Kernel ridge regression with a Cholesky dual solver.

use crate::error::{Error, Result};
use crate::numeric::{cholesky, cholesky_solve, Standardizer};
use ndarray::{Array2, ArrayView1, ArrayView2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum KernelKind {
    Rbf { gamma: f64 },
    Poly { gamma: f64, degree: u32 },
    /// Plain inner product; not part of any grid, used to cross-check the
    /// dual solution against the primal ridge solver.
    #[allow(dead_code)]
    Linear,
}

impl KernelKind {
    fn eval(&self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        match *self {
            KernelKind::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
            KernelKind::Poly { gamma, degree } => {
                let dot: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
                (gamma * dot + 1.0).powi(degree as i32)
            }
            KernelKind::Linear => a.iter().zip(b.iter()).map(|(x, y)| x * y).sum(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct KernelModel {
    standardizer: Standardizer,
    train: Array2<f64>,
    dual: Vec<f64>,
    kind: KernelKind,
}

impl KernelModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let xs = self.standardizer.transform(x);
        xs.rows()
            .into_iter()
            .map(|q| {
                self.train
                    .rows()
                    .into_iter()
                    .zip(&self.dual)
                    .map(|(tr, c)| self.kind.eval(q.view(), tr) * c)
                    .sum()
            })
            .collect()
    }
}

/// Fits the dual coefficients from `(K + αI) c = y`. Sample weights use the
/// symmetrized system `(W^{1/2} K W^{1/2} + αI) d = W^{1/2} y`, `c = W^{1/2} d`,
/// which stays positive definite for α > 0.
pub(crate) fn fit(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    alpha: f64,
    kind: KernelKind,
    standardize: bool,
) -> Result<KernelModel> {
    let n = x.nrows();
    let standardizer = if standardize {
        Standardizer::fit(x, weights)
    } else {
        Standardizer::identity(x.ncols())
    };
    let xs = standardizer.transform(x);

    let sqrt_w: Option<Vec<f64>> = weights.map(|w| w.iter().map(|v| v.sqrt()).collect());

    let mut k = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut v = kind.eval(xs.row(i), xs.row(j));
            if let Some(sw) = &sqrt_w {
                v *= sw[i] * sw[j];
            }
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
        k[[i, i]] += alpha;
    }

    let rhs: Vec<f64> = match &sqrt_w {
        Some(sw) => y.iter().zip(sw).map(|(yi, s)| yi * s).collect(),
        None => y.to_vec(),
    };

    let l = cholesky(&k).map_err(|e| {
        Error::Numerical(format!("kernel ridge factorization failed (alpha={alpha}): {e}"))
    })?;
    let mut dual = cholesky_solve(&l, &rhs);
    if let Some(sw) = &sqrt_w {
        for (c, s) in dual.iter_mut().zip(sw) {
            *c *= s;
        }
    }

    Ok(KernelModel { standardizer, train: xs, dual, kind })
}
