//! Stagewise gradient-boosted trees with L2-penalized leaf values.
//!
//! Regression boosts squared error; each round fits a depth-limited tree to
//! the residuals with leaf values Σ(w·r)/(Σw + λ), so training loss is
//! non-increasing round over round for learning rates in (0, 1].
//! Classification boosts logistic loss in log-odds space with Newton leaf
//! values Σ(w·(y−p))/(Σ(w·p(1−p)) + λ).

use super::tree::{self, TreeConfig, TreeModel};
use super::{LearnerFamily, LearnerSpec};
use crate::error::{Error, Result};
use crate::numeric::{clip, seeded_rng, sigmoid};
use ndarray::ArrayView2;

#[derive(Debug, Clone)]
pub(crate) struct GbtModel {
    initial: f64,
    trees: Vec<TreeModel>,
    learning_rate: f64,
    classification: bool,
    /// Weighted training loss after each round (MSE for regression,
    /// log-loss for classification).
    pub train_losses: Vec<f64>,
}

impl GbtModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let mut scores = vec![self.initial; x.nrows()];
        for t in &self.trees {
            for (s, p) in scores.iter_mut().zip(t.predict(x)) {
                *s += self.learning_rate * p;
            }
        }
        if self.classification {
            for s in &mut scores {
                *s = sigmoid(*s);
            }
        }
        scores
    }
}

/// Maps the two boosting grids onto shared (depth, λ) semantics.
pub(crate) fn params_from_spec(spec: &LearnerSpec) -> Result<(usize, f64)> {
    let (depth_key, lambda_key) = match spec.family() {
        LearnerFamily::GbtLight => ("max_depth", "reg_lambda"),
        LearnerFamily::GbtCat => ("depth", "l2_leaf_reg"),
        other => return Err(Error::invalid(format!("params_from_spec got family {other}"))),
    };
    let depth = spec.get_i64(depth_key)?;
    if depth < 1 {
        return Err(Error::invalid("boosting depth must be at least 1"));
    }
    let lambda = spec.get_f64(lambda_key)?;
    if lambda < 0.0 {
        return Err(Error::invalid("leaf penalty must be nonnegative"));
    }
    Ok((depth as usize, lambda))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn fit(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    depth: usize,
    lambda: f64,
    n_rounds: usize,
    learning_rate: f64,
    classification: bool,
) -> Result<GbtModel> {
    let n = x.nrows();
    let w: Vec<f64> = weights.map(|v| v.to_vec()).unwrap_or_else(|| vec![1.0; n]);
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return Err(Error::invalid("all sample weights are zero"));
    }
    let wmean = y.iter().zip(&w).map(|(yi, wi)| yi * wi).sum::<f64>() / sw;

    let initial = if classification {
        let p0 = clip(wmean, 1e-6, 1.0 - 1e-6);
        (p0 / (1.0 - p0)).ln()
    } else {
        wmean
    };

    let cfg = TreeConfig { leaf_lambda: lambda, ..TreeConfig::plain(depth, 1) };
    let mut rng = seeded_rng(0, "gbt");

    let mut scores = vec![initial; n];
    let mut trees = Vec::with_capacity(n_rounds);
    let mut train_losses = Vec::with_capacity(n_rounds);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];

    for _round in 0..n_rounds {
        if classification {
            for i in 0..n {
                let p = sigmoid(scores[i]);
                grad[i] = y[i] - p;
                hess[i] = (p * (1.0 - p)).max(1e-12);
            }
        } else {
            for i in 0..n {
                grad[i] = y[i] - scores[i];
                hess[i] = 1.0;
            }
        }
        let tree = tree::fit(x, &grad, Some(&w), Some(&hess), &cfg, &mut rng);
        for (s, p) in scores.iter_mut().zip(tree.predict(x)) {
            *s += learning_rate * p;
        }
        trees.push(tree);

        let loss = if classification {
            y.iter()
                .zip(&scores)
                .zip(&w)
                .map(|((yi, s), wi)| {
                    let p = clip(sigmoid(*s), 1e-12, 1.0 - 1e-12);
                    -wi * (yi * p.ln() + (1.0 - yi) * (1.0 - p).ln())
                })
                .sum::<f64>()
                / sw
        } else {
            y.iter().zip(&scores).zip(&w).map(|((yi, s), wi)| wi * (yi - s) * (yi - s)).sum::<f64>()
                / sw
        };
        train_losses.push(loss);
    }

    Ok(GbtModel { initial, trees, learning_rate, classification, train_losses })
}
