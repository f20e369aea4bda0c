//! CART regression trees: greedy best-split on weighted squared-error
//! reduction. Binary {0,1} targets make this identical to Gini splitting
//! (weighted SSE of a Bernoulli node is W·p(1−p), half its Gini impurity),
//! so classification mode reuses the same search with leaves predicting the
//! weighted class fraction.

use super::{LearnerSpec, ParamValue};
use crate::error::{Error, Result};
use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub(crate) struct TreeConfig {
    pub max_depth: usize,
    /// Minimum row count per leaf (already resolved from fraction form).
    pub min_leaf: usize,
    /// Features considered per split; `None` means all.
    pub feature_subsample: Option<usize>,
    /// Extremely-randomized mode: one uniform threshold per feature
    /// instead of an exhaustive scan.
    pub random_thresholds: bool,
    /// Leaf values are Σ(w·target) / (Σ(w·hessian) + λ); λ = 0 gives the
    /// plain weighted mean.
    pub leaf_lambda: f64,
}

impl TreeConfig {
    pub fn plain(max_depth: usize, min_leaf: usize) -> Self {
        TreeConfig {
            max_depth,
            min_leaf,
            feature_subsample: None,
            random_thresholds: false,
            leaf_lambda: 0.0,
        }
    }
}

/// Resolves the grid's `min_samples_leaf` convention: values below 1 are
/// fractions of the training size (rounded up), values of 1 or more are
/// absolute counts.
pub(crate) fn resolve_min_leaf(value: &ParamValue, n_train: usize) -> Result<usize> {
    let v = value
        .as_f64()
        .ok_or_else(|| Error::invalid("min_samples_leaf must be numeric"))?;
    if v <= 0.0 {
        return Err(Error::invalid("min_samples_leaf must be positive"));
    }
    if v < 1.0 {
        Ok(((v * n_train as f64).ceil() as usize).max(1))
    } else {
        Ok(v.round() as usize)
    }
}

pub(crate) fn config_from_spec(spec: &LearnerSpec, n_train: usize) -> Result<TreeConfig> {
    let max_depth = spec.get_i64("max_depth")?;
    if max_depth < 1 {
        return Err(Error::invalid("max_depth must be at least 1"));
    }
    let leaf_param = spec
        .params()
        .get("min_samples_leaf")
        .ok_or_else(|| Error::invalid("missing min_samples_leaf"))?;
    let min_leaf = resolve_min_leaf(leaf_param, n_train)?;
    Ok(TreeConfig::plain(max_depth as usize, min_leaf))
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone)]
pub(crate) struct TreeModel {
    nodes: Vec<Node>,
}

impl TreeModel {
    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        let mut id = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    id = if row[*feature] <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        x.rows().into_iter().map(|r| self.predict_row(r)).collect()
    }

    #[cfg(test)]
    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Leaf row counts, in depth-first order. Used by tests that check the
    /// min_samples_leaf contract.
    #[cfg(test)]
    pub fn leaf_counts(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        let mut counts = vec![0usize; self.nodes.len()];
        for row in x.rows() {
            let mut id = 0usize;
            loop {
                match &self.nodes[id] {
                    Node::Leaf { .. } => {
                        counts[id] += 1;
                        break;
                    }
                    Node::Split { feature, threshold, left, right } => {
                        id = if row[*feature] <= *threshold {
                            *left as usize
                        } else {
                            *right as usize
                        };
                    }
                }
            }
        }
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, Node::Leaf { .. }))
            .map(|(i, _)| counts[i])
            .collect()
    }
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    target: &'a [f64],
    w: Vec<f64>,
    /// Per-row hessian for Newton leaf values; `None` means 1 everywhere.
    hess: Option<&'a [f64]>,
    cfg: &'a TreeConfig,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl<'a> Builder<'a> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        let mut num = 0.0;
        let mut den = self.cfg.leaf_lambda;
        for &i in idx {
            num += self.w[i] * self.target[i];
            den += self.w[i] * self.hess.map_or(1.0, |h| h[i]);
        }
        if den <= 0.0 {
            0.0
        } else {
            num / den
        }
    }

    fn candidate_features(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let d = self.x.ncols();
        match self.cfg.feature_subsample {
            Some(k) if k < d => {
                let mut picked = rand::seq::index::sample(rng, d, k).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..d).collect(),
        }
    }

    /// Best greedy split of `idx` on `feature`, if any boundary satisfies
    /// the per-side row minimum. Score is the split's total child score
    /// Σ(wy)²/Σw maximized, equivalent to minimizing weighted SSE.
    fn best_greedy_split(&self, idx: &[usize], feature: usize) -> Option<SplitChoice> {
        let m = idx.len();
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_unstable_by(|&a, &b| {
            self.x[[a, feature]]
                .partial_cmp(&self.x[[b, feature]])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });

        let total_w: f64 = order.iter().map(|&i| self.w[i]).sum();
        let total_wy: f64 = order.iter().map(|&i| self.w[i] * self.target[i]).sum();

        let mut best: Option<SplitChoice> = None;
        let mut left_w = 0.0;
        let mut left_wy = 0.0;
        for p in 1..m {
            let prev = order[p - 1];
            left_w += self.w[prev];
            left_wy += self.w[prev] * self.target[prev];
            let cur = order[p];
            let (v_prev, v_cur) = (self.x[[prev, feature]], self.x[[cur, feature]]);
            if v_prev == v_cur {
                continue;
            }
            if p < self.cfg.min_leaf || m - p < self.cfg.min_leaf {
                continue;
            }
            let right_w = total_w - left_w;
            let right_wy = total_wy - left_wy;
            if left_w <= 0.0 || right_w <= 0.0 {
                continue;
            }
            let score = left_wy * left_wy / left_w + right_wy * right_wy / right_w;
            let threshold = 0.5 * (v_prev + v_cur);
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(SplitChoice { feature, threshold, score });
            }
        }
        best
    }

    /// Extra-trees style: a single uniform threshold in the node's value
    /// range of `feature`.
    fn random_split(
        &self,
        idx: &[usize],
        feature: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<SplitChoice> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in idx {
            let v = self.x[[i, feature]];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi <= lo {
            return None;
        }
        let threshold = rng.gen_range(lo..hi);
        let mut left_w = 0.0;
        let mut left_wy = 0.0;
        let mut left_n = 0usize;
        let mut total_w = 0.0;
        let mut total_wy = 0.0;
        for &i in idx {
            let wv = self.w[i];
            let wy = wv * self.target[i];
            total_w += wv;
            total_wy += wy;
            if self.x[[i, feature]] <= threshold {
                left_w += wv;
                left_wy += wy;
                left_n += 1;
            }
        }
        let right_n = idx.len() - left_n;
        if left_n < self.cfg.min_leaf || right_n < self.cfg.min_leaf {
            return None;
        }
        let right_w = total_w - left_w;
        let right_wy = total_wy - left_wy;
        if left_w <= 0.0 || right_w <= 0.0 {
            return None;
        }
        let score = left_wy * left_wy / left_w + right_wy * right_wy / right_w;
        Some(SplitChoice { feature, threshold, score })
    }

    fn node_is_pure(&self, idx: &[usize]) -> bool {
        let first = self.target[idx[0]];
        idx.iter().all(|&i| self.target[i] == first)
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> u32 {
        let make_leaf = depth >= self.cfg.max_depth
            || idx.len() < 2 * self.cfg.min_leaf
            || self.node_is_pure(&idx);

        let mut chosen: Option<SplitChoice> = None;
        if !make_leaf {
            for feature in self.candidate_features(rng) {
                let cand = if self.cfg.random_thresholds {
                    self.random_split(&idx, feature, rng)
                } else {
                    self.best_greedy_split(&idx, feature)
                };
                if let Some(c) = cand {
                    if chosen.as_ref().is_none_or(|b| c.score > b.score) {
                        chosen = Some(c);
                    }
                }
            }
        }

        match chosen {
            None => {
                let id = self.nodes.len() as u32;
                self.nodes.push(Node::Leaf { value: self.leaf_value(&idx) });
                id
            }
            Some(split) => {
                let (mut left_idx, mut right_idx) = (Vec::new(), Vec::new());
                for &i in &idx {
                    if self.x[[i, split.feature]] <= split.threshold {
                        left_idx.push(i);
                    } else {
                        right_idx.push(i);
                    }
                }
                let id = self.nodes.len();
                self.nodes.push(Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: 0,
                    right: 0,
                });
                let left = self.build(left_idx, depth + 1, rng);
                let right = self.build(right_idx, depth + 1, rng);
                if let Node::Split { left: l, right: r, .. } = &mut self.nodes[id] {
                    *l = left;
                    *r = right;
                }
                id as u32
            }
        }
    }
}

pub(crate) fn fit(
    x: ArrayView2<'_, f64>,
    target: &[f64],
    weights: Option<&[f64]>,
    hessian: Option<&[f64]>,
    cfg: &TreeConfig,
    rng: &mut ChaCha8Rng,
) -> TreeModel {
    let n = x.nrows();
    let w = weights.map(|v| v.to_vec()).unwrap_or_else(|| vec![1.0; n]);
    // reborrow so every reference in Builder shares the body lifetime
    // (ArrayView is invariant in its lifetime and cannot shrink on its own)
    let xv = x.view();
    let mut builder = Builder { x: xv, target, w, hess: hessian, cfg, nodes: Vec::new() };
    let idx: Vec<usize> = (0..n).collect();
    builder.build(idx, 0, rng);
    TreeModel { nodes: builder.nodes }
}

/// Fits a tree on bootstrap/subset indices by materializing the gathered
/// rows' weights; `rows` may contain repeats.
pub(crate) fn fit_on_rows(
    x: ArrayView2<'_, f64>,
    target: &[f64],
    weights: Option<&[f64]>,
    rows: &[usize],
    cfg: &TreeConfig,
    rng: &mut ChaCha8Rng,
) -> TreeModel {
    let d = x.ncols();
    let mut xb = ndarray::Array2::<f64>::zeros((rows.len(), d));
    let mut yb = Vec::with_capacity(rows.len());
    let mut wb = Vec::with_capacity(rows.len());
    for (r, &i) in rows.iter().enumerate() {
        xb.row_mut(r).assign(&x.row(i));
        yb.push(target[i]);
        wb.push(weights.map_or(1.0, |w| w[i]));
    }
    fit(xb.view(), &yb, Some(&wb), None, cfg, rng)
}
