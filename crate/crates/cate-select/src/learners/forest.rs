//! Tree ensembles: bagged random forests and extremely-randomized trees.

use super::tree::{self, TreeConfig, TreeModel};
use crate::numeric::seeded_rng;
use ndarray::ArrayView2;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForestVariant {
    /// Bootstrap rows, √d feature subsample per split, exhaustive
    /// thresholds.
    Rf,
    /// All rows, all features, one random threshold per feature.
    Extra,
}

#[derive(Debug, Clone)]
pub(crate) struct ForestModel {
    trees: Vec<TreeModel>,
}

impl ForestModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let n = x.nrows();
        let mut acc = vec![0.0; n];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.predict(x)) {
                *a += p;
            }
        }
        let k = self.trees.len() as f64;
        for a in &mut acc {
            *a /= k;
        }
        acc
    }
}

pub(crate) struct ForestOptions {
    pub bootstrap: bool,
    pub feature_subsample: Option<usize>,
    pub random_thresholds: bool,
}

impl ForestOptions {
    fn for_variant(variant: ForestVariant, d: usize) -> Self {
        match variant {
            ForestVariant::Rf => ForestOptions {
                bootstrap: true,
                feature_subsample: Some((d as f64).sqrt().ceil() as usize),
                random_thresholds: false,
            },
            ForestVariant::Extra => ForestOptions {
                bootstrap: false,
                feature_subsample: None,
                random_thresholds: true,
            },
        }
    }
}

pub(crate) fn fit(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    n_estimators: usize,
    variant: ForestVariant,
    base_cfg: &TreeConfig,
    seed: u64,
) -> ForestModel {
    let opts = ForestOptions::for_variant(variant, x.ncols());
    fit_with_options(x, y, weights, n_estimators, &opts, base_cfg, seed)
}

pub(crate) fn fit_with_options(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    n_estimators: usize,
    opts: &ForestOptions,
    base_cfg: &TreeConfig,
    seed: u64,
) -> ForestModel {
    let n = x.nrows();
    let cfg = TreeConfig {
        feature_subsample: opts.feature_subsample,
        random_thresholds: opts.random_thresholds,
        ..base_cfg.clone()
    };
    // Each tree draws from its own derived stream, so the ensemble is
    // reproducible regardless of how fitting is scheduled.
    let trees: Vec<TreeModel> = (0..n_estimators)
        .map(|k| {
            let mut rng = seeded_rng(seed, &format!("forest-tree-{k}"));
            if opts.bootstrap {
                let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                tree::fit_on_rows(x, y, weights, &rows, &cfg, &mut rng)
            } else {
                tree::fit(x, y, weights, None, &cfg, &mut rng)
            }
        })
        .collect();
    ForestModel { trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::seeded_rng;
    use ndarray::Array2;

    fn toy() -> (Array2<f64>, Vec<f64>) {
        let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        let y: Vec<f64> = (0..40).map(|i| (i % 5) as f64 + 0.1 * (i as f64)).collect();
        (x, y)
    }

    #[test]
    fn degenerate_ensemble_equals_single_tree() {
        let (x, y) = toy();
        let cfg = TreeConfig::plain(6, 1);
        let opts = ForestOptions { bootstrap: false, feature_subsample: None, random_thresholds: false };
        let forest = fit_with_options(x.view(), &y, None, 1, &opts, &cfg, 3);
        let single = tree::fit(x.view(), &y, None, None, &cfg, &mut seeded_rng(3, "ignored"));
        assert_eq!(forest.predict(x.view()), single.predict(x.view()));
    }

    #[test]
    fn predictions_bounded_by_target_range() {
        let (x, y) = toy();
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cfg = TreeConfig::plain(4, 2);
        for variant in [ForestVariant::Rf, ForestVariant::Extra] {
            let forest = fit(x.view(), &y, None, 25, variant, &cfg, 7);
            for p in forest.predict(x.view()) {
                assert!(p >= lo - 1e-12 && p <= hi + 1e-12, "prediction {p} outside [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn same_seed_reproduces_predictions() {
        let (x, y) = toy();
        let cfg = TreeConfig::plain(5, 1);
        for variant in [ForestVariant::Rf, ForestVariant::Extra] {
            let a = fit(x.view(), &y, None, 10, variant, &cfg, 42);
            let b = fit(x.view(), &y, None, 10, variant, &cfg, 42);
            assert_eq!(a.predict(x.view()), b.predict(x.view()));
            let c = fit(x.view(), &y, None, 10, variant, &cfg, 43);
            assert_ne!(a.predict(x.view()), c.predict(x.view()));
        }
    }
}
