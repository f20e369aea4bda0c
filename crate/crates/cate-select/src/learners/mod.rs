//! In-repo base learners with their hyperparameter grids: L1/L2 linear
//! models, kernel ridge, CART, random and extremely-randomized forests,
//! and gradient-boosted trees, in regression and probability-classification
//! modes.

mod forest;
mod gbt;
mod grid;
mod kernel;
mod linear;
mod tree;

pub use forest::ForestVariant;
pub use grid::{default_spec, expand_grid, reduced_grid};
pub(crate) use linear::LinearOptions;

use crate::error::{Error, Result};
use crate::numeric::clip;
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Probability outputs are clipped into this closed interval, enforcing
/// positivity wherever estimated propensities enter a denominator.
pub const PROPENSITY_CLIP: (f64, f64) = (0.01, 0.99);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerFamily {
    L1Linear,
    L2Linear,
    KernelRidge,
    Tree,
    RandomForest,
    ExtraTrees,
    GbtLight,
    GbtCat,
}

impl LearnerFamily {
    pub fn name(self) -> &'static str {
        match self {
            LearnerFamily::L1Linear => "l1_linear",
            LearnerFamily::L2Linear => "l2_linear",
            LearnerFamily::KernelRidge => "kernel_ridge",
            LearnerFamily::Tree => "tree",
            LearnerFamily::RandomForest => "random_forest",
            LearnerFamily::ExtraTrees => "extra_trees",
            LearnerFamily::GbtLight => "gbt_light",
            LearnerFamily::GbtCat => "gbt_cat",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::all()
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown learner family '{s}'")))
    }

    pub fn all() -> &'static [LearnerFamily] {
        &[
            LearnerFamily::L1Linear,
            LearnerFamily::L2Linear,
            LearnerFamily::KernelRidge,
            LearnerFamily::Tree,
            LearnerFamily::RandomForest,
            LearnerFamily::ExtraTrees,
            LearnerFamily::GbtLight,
            LearnerFamily::GbtCat,
        ]
    }

    pub fn is_ensemble(self) -> bool {
        matches!(
            self,
            LearnerFamily::RandomForest
                | LearnerFamily::ExtraTrees
                | LearnerFamily::GbtLight
                | LearnerFamily::GbtCat
        )
    }
}

impl fmt::Display for LearnerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A hyperparameter value. Floats and integers print in their shortest
/// round-trip form so identifiers are stable.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Str(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Str(v) => f.write_str(v),
        }
    }
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Float(v) => Some(*v),
            ParamValue::Str(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Str(v) => Some(v),
            _ => None,
        }
    }
}

/// One point of a base-learner search space: a family plus a full
/// hyperparameter assignment drawn from that family's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSpec {
    family: LearnerFamily,
    params: BTreeMap<String, ParamValue>,
}

impl LearnerSpec {
    /// Builds a validated spec. Parameter names and values must come from
    /// the family's grid domain; unknown names are rejected.
    pub fn new(
        family: LearnerFamily,
        params: impl IntoIterator<Item = (String, ParamValue)>,
    ) -> Result<Self> {
        let spec = LearnerSpec { family, params: params.into_iter().collect() };
        grid::validate_spec(&spec)?;
        Ok(spec)
    }

    pub(crate) fn new_unchecked(
        family: LearnerFamily,
        params: BTreeMap<String, ParamValue>,
    ) -> Self {
        LearnerSpec { family, params }
    }

    pub fn family(&self) -> LearnerFamily {
        self.family
    }

    pub fn params(&self) -> &BTreeMap<String, ParamValue> {
        &self.params
    }

    /// Sorted `name=value` pairs; the key used in results files.
    pub fn hyper_id(&self) -> String {
        let mut s = String::new();
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(k);
            s.push('=');
            s.push_str(&v.to_string());
        }
        s
    }

    /// Full identifier: family plus sorted pairs.
    pub fn id(&self) -> String {
        format!("{}/{}", self.family.name(), self.hyper_id())
    }

    /// Whether every parameter sits at the grid's default-marked value.
    pub fn is_default(&self) -> bool {
        *self == default_spec(self.family)
    }

    pub fn get_f64(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .and_then(ParamValue::as_f64)
            .ok_or_else(|| Error::invalid(format!("{}: missing numeric parameter '{name}'", self.id())))
    }

    pub fn get_i64(&self, name: &str) -> Result<i64> {
        self.params
            .get(name)
            .and_then(ParamValue::as_i64)
            .ok_or_else(|| Error::invalid(format!("{}: missing integer parameter '{name}'", self.id())))
    }

    pub fn get_str(&self, name: &str) -> Result<&str> {
        self.params
            .get(name)
            .and_then(ParamValue::as_str)
            .ok_or_else(|| Error::invalid(format!("{}: missing string parameter '{name}'", self.id())))
    }
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// What a fitted learner predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Regressor,
    ProbClassifier,
}

#[derive(Debug, Clone)]
pub(crate) enum Model {
    Linear(linear::LinearModel),
    Kernel(kernel::KernelModel),
    Tree(tree::TreeModel),
    Forest(forest::ForestModel),
    Gbt(gbt::GbtModel),
}

/// A trained base learner. Immutable and freely shareable; prediction is
/// defined on any matrix with the training dimensionality.
#[derive(Debug, Clone)]
pub struct FittedLearner {
    pub family: LearnerFamily,
    pub mode: Mode,
    input_dim: usize,
    model: Model,
}

impl FittedLearner {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.input_dim {
            return Err(Error::invalid(format!(
                "prediction input has {} features, model was trained on {}",
                x.ncols(),
                self.input_dim
            )));
        }
        let mut out = match &self.model {
            Model::Linear(m) => m.predict(x),
            Model::Kernel(m) => m.predict(x),
            Model::Tree(m) => m.predict(x),
            Model::Forest(m) => m.predict(x),
            Model::Gbt(m) => m.predict(x),
        };
        if self.mode == Mode::ProbClassifier {
            for v in &mut out {
                *v = clip(*v, PROPENSITY_CLIP.0, PROPENSITY_CLIP.1);
            }
        }
        Ok(out)
    }

    /// Per-round training losses, present only for boosted models.
    pub fn gbt_train_losses(&self) -> Option<&[f64]> {
        match &self.model {
            Model::Gbt(m) => Some(&m.train_losses),
            _ => None,
        }
    }

    /// Coefficients (on the standardized feature scale) for linear models.
    pub fn linear_coefficients(&self) -> Option<&[f64]> {
        match &self.model {
            Model::Linear(m) => Some(&m.coefficients),
            _ => None,
        }
    }
}

/// Test hook: the largest absolute prediction gap between the kernel-ridge
/// dual solve with a plain inner-product kernel and the primal ridge
/// solver, on centered targets without an intercept. The two routes solve
/// the same objective, so the gap is numerical error only.
#[doc(hidden)]
pub fn kernel_linear_equivalence_gap(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    alpha: f64,
    query: ArrayView2<'_, f64>,
) -> Result<f64> {
    check_training_inputs(x, y, None)?;
    let y_mean = crate::numeric::mean(y);
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let dual = kernel::fit(x, &yc, None, alpha, kernel::KernelKind::Linear, true)?;
    let primal = linear::fit_ridge_raw(
        x,
        &yc,
        None,
        alpha,
        &LinearOptions { standardize: true, intercept: false },
    )?;
    let pd = dual.predict(query);
    let pp = primal.predict(query);
    Ok(pd
        .iter()
        .zip(&pp)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Run-level knobs shared by every fit: ensemble size (1000 matches the
/// study configuration; tests dial it down), boosting learning rate, and
/// the seed all stochastic learners derive their streams from.
#[derive(Debug, Clone)]
pub struct FitContext {
    pub ensemble_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for FitContext {
    fn default() -> Self {
        FitContext { ensemble_size: 1000, learning_rate: 0.1, seed: 0 }
    }
}

impl FitContext {
    pub fn with_seed(&self, seed: u64) -> Self {
        FitContext { seed, ..self.clone() }
    }
}

fn check_training_inputs(x: ArrayView2<'_, f64>, y: &[f64], weights: Option<&[f64]>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::invalid("empty training set"));
    }
    if x.nrows() != y.len() {
        return Err(Error::invalid(format!(
            "x has {} rows but y has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    if let Some(w) = weights {
        if w.len() != y.len() {
            return Err(Error::invalid("weights length mismatch"));
        }
        if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
    }
    Ok(())
}

/// Penalized linear fit (L1 via cyclic coordinate descent, L2 in closed
/// form). Features are standardized internally; the intercept is never
/// penalized.
pub fn fit_linear(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<FittedLearner> {
    check_training_inputs(x, y, weights)?;
    let alpha = spec.get_f64("alpha")?;
    if alpha <= 0.0 {
        return Err(Error::invalid("alpha must be strictly positive"));
    }
    let opts = LinearOptions::default();
    let model = match spec.family() {
        LearnerFamily::L2Linear => linear::fit_ridge_raw(x, y, weights, alpha, &opts)?,
        LearnerFamily::L1Linear => {
            let max_iter = spec.get_i64("max_iter")? as usize;
            linear::fit_lasso_raw(x, y, weights, alpha, max_iter, &opts)?
        }
        other => return Err(Error::invalid(format!("fit_linear got family {other}"))),
    };
    Ok(FittedLearner {
        family: spec.family(),
        mode: Mode::Regressor,
        input_dim: x.ncols(),
        model: Model::Linear(model),
    })
}

/// Kernel ridge regression; the dual system `(K + αI)c = y` is solved by a
/// symmetric positive-definite factorization.
pub fn fit_kernel_ridge(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    y: &[f64],
) -> Result<FittedLearner> {
    fit_kernel_ridge_weighted(spec, x, y, None)
}

pub fn fit_kernel_ridge_weighted(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<FittedLearner> {
    check_training_inputs(x, y, weights)?;
    let alpha = spec.get_f64("alpha")?;
    let gamma = spec.get_f64("gamma")?;
    if alpha <= 0.0 || gamma <= 0.0 {
        return Err(Error::invalid("kernel ridge requires alpha > 0 and gamma > 0"));
    }
    let kind = match spec.get_str("kernel")? {
        "rbf" => kernel::KernelKind::Rbf { gamma },
        "poly" => {
            let degree = spec.get_i64("degree")? as u32;
            kernel::KernelKind::Poly { gamma, degree }
        }
        other => return Err(Error::invalid(format!("unknown kernel '{other}'"))),
    };
    let model = kernel::fit(x, y, weights, alpha, kind, true)?;
    Ok(FittedLearner {
        family: spec.family(),
        mode: Mode::Regressor,
        input_dim: x.ncols(),
        model: Model::Kernel(model),
    })
}

/// Single CART tree: greedy best-split on weighted squared-error reduction
/// (for binary 0/1 targets this coincides with Gini), leaves predicting the
/// weighted mean.
pub fn fit_tree(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<FittedLearner> {
    check_training_inputs(x, y, weights)?;
    let cfg = tree::config_from_spec(spec, x.nrows())?;
    let model = tree::fit(x, y, weights, None, &cfg, &mut crate::numeric::seeded_rng(0, "tree"));
    Ok(FittedLearner {
        family: spec.family(),
        mode: Mode::Regressor,
        input_dim: x.ncols(),
        model: Model::Tree(model),
    })
}

/// Tree ensemble. Random forests bootstrap rows and subsample √d features
/// per split; extremely-randomized trees keep all rows and draw split
/// thresholds at random. Deterministic given the seed.
pub fn fit_forest(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    n_estimators: usize,
    seed: u64,
) -> Result<FittedLearner> {
    check_training_inputs(x, y, weights)?;
    if n_estimators == 0 {
        return Err(Error::invalid("n_estimators must be at least 1"));
    }
    let variant = match spec.family() {
        LearnerFamily::RandomForest => ForestVariant::Rf,
        LearnerFamily::ExtraTrees => ForestVariant::Extra,
        other => return Err(Error::invalid(format!("fit_forest got family {other}"))),
    };
    let cfg = tree::config_from_spec(spec, x.nrows())?;
    let model = forest::fit(x, y, weights, n_estimators, variant, &cfg, seed);
    Ok(FittedLearner {
        family: spec.family(),
        mode: Mode::Regressor,
        input_dim: x.ncols(),
        model: Model::Forest(model),
    })
}

/// Stagewise least-squares boosting of depth-limited trees with
/// L2-penalized leaf values (`leaf = Σ residual / (count + λ)`).
pub fn fit_gbt(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    n_estimators: usize,
    learning_rate: f64,
) -> Result<FittedLearner> {
    check_training_inputs(x, y, weights)?;
    if n_estimators == 0 {
        return Err(Error::invalid("n_estimators must be at least 1"));
    }
    if learning_rate <= 0.0 {
        return Err(Error::invalid("learning_rate must be positive"));
    }
    let (depth, lambda) = gbt::params_from_spec(spec)?;
    let model = gbt::fit(x, y, weights, depth, lambda, n_estimators, learning_rate, false)?;
    Ok(FittedLearner {
        family: spec.family(),
        mode: Mode::Regressor,
        input_dim: x.ncols(),
        model: Model::Gbt(model),
    })
}

/// Direct RBF kernel ridge fit with arbitrary regularization; the
/// demonstration study needs smoothing levels the grid does not carry.
pub(crate) fn kernel_fit_rbf(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    alpha: f64,
    gamma: f64,
) -> Result<FittedLearner> {
    check_training_inputs(x, y, None)?;
    if alpha <= 0.0 || gamma <= 0.0 {
        return Err(Error::invalid("rbf kernel ridge requires alpha > 0 and gamma > 0"));
    }
    let model = kernel::fit(x, y, None, alpha, kernel::KernelKind::Rbf { gamma }, true)?;
    Ok(FittedLearner {
        family: LearnerFamily::KernelRidge,
        mode: Mode::Regressor,
        input_dim: x.ncols(),
        model: Model::Kernel(model),
    })
}

/// Fits a learner of the spec's family in regression mode, with the
/// ensemble knobs taken from `ctx`.
pub fn fit_regressor(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    ctx: &FitContext,
) -> Result<FittedLearner> {
    match spec.family() {
        LearnerFamily::L1Linear | LearnerFamily::L2Linear => fit_linear(spec, x, y, weights),
        LearnerFamily::KernelRidge => fit_kernel_ridge_weighted(spec, x, y, weights),
        LearnerFamily::Tree => fit_tree(spec, x, y, weights),
        LearnerFamily::RandomForest | LearnerFamily::ExtraTrees => {
            fit_forest(spec, x, y, weights, ctx.ensemble_size, ctx.seed)
        }
        LearnerFamily::GbtLight | LearnerFamily::GbtCat => {
            fit_gbt(spec, x, y, weights, ctx.ensemble_size, ctx.learning_rate)
        }
    }
}

/// Classification-mode fit of the same family on a binary target. Trees and
/// forests predict leaf class fractions, boosting switches to logistic
/// loss, and linear/kernel families regress on the {0,1} labels. Outputs
/// are clipped to [`PROPENSITY_CLIP`].
pub fn fit_propensity(
    spec: &LearnerSpec,
    x: ArrayView2<'_, f64>,
    t: &[u8],
    ctx: &FitContext,
) -> Result<FittedLearner> {
    let n1 = t.iter().filter(|&&v| v == 1).count();
    if n1 == 0 || n1 == t.len() {
        return Err(Error::invalid("one-class treatment: propensity fit needs both classes"));
    }
    let y: Vec<f64> = t.iter().map(|&v| v as f64).collect();
    let mut fitted = match spec.family() {
        LearnerFamily::GbtLight | LearnerFamily::GbtCat => {
            let (depth, lambda) = gbt::params_from_spec(spec)?;
            check_training_inputs(x, &y, None)?;
            let model =
                gbt::fit(x, &y, None, depth, lambda, ctx.ensemble_size, ctx.learning_rate, true)?;
            FittedLearner {
                family: spec.family(),
                mode: Mode::Regressor,
                input_dim: x.ncols(),
                model: Model::Gbt(model),
            }
        }
        _ => fit_regressor(spec, x, &y, None, ctx)?,
    };
    fitted.mode = Mode::ProbClassifier;
    Ok(fitted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_ids_are_stable() {
        let spec = LearnerSpec::new(
            LearnerFamily::L2Linear,
            [
                ("max_iter".to_string(), ParamValue::Int(1000)),
                ("alpha".to_string(), ParamValue::Float(0.5)),
            ],
        )
        .unwrap();
        assert_eq!(spec.hyper_id(), "alpha=0.5,max_iter=1000");
        assert_eq!(spec.id(), "l2_linear/alpha=0.5,max_iter=1000");
    }

    #[test]
    fn unknown_parameter_rejected() {
        let err = LearnerSpec::new(
            LearnerFamily::L2Linear,
            [("bogus".to_string(), ParamValue::Int(1))],
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn propensity_requires_two_classes() {
        let x = ndarray::Array2::zeros((4, 1));
        let spec = default_spec(LearnerFamily::Tree);
        let err = fit_propensity(&spec, x.view(), &[0, 0, 0, 0], &FitContext::default()).unwrap_err();
        assert!(err.to_string().contains("one-class"), "{err}");
    }
}
