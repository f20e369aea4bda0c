//! CATE estimators composed over base learners: S-, T- and X-Learner,
//! Doubly Robust (AIPW pseudo-outcome regression), DML with a linear effect
//! stage, and inverse-propensity-weighted regression adjustment. Every
//! internal learner of a candidate shares one family and one hyperparameter
//! assignment.

pub mod crossfit;
mod linear_cate;
mod meta_learners;
mod orthogonal;

pub use linear_cate::{fit_residual_cate, LinearCate};
pub use orthogonal::aipw_pseudo_outcomes;

use crate::data::DataView;
use crate::error::{Error, Result};
use crate::learners::{FitContext, FittedLearner, LearnerSpec};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "SL")]
    SLearner,
    #[serde(rename = "TL")]
    TLearner,
    #[serde(rename = "XL")]
    XLearner,
    #[serde(rename = "DR")]
    DoublyRobust,
    #[serde(rename = "DML")]
    Dml,
    #[serde(rename = "IPSW")]
    Ipsw,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::SLearner => "SL",
            EstimatorKind::TLearner => "TL",
            EstimatorKind::XLearner => "XL",
            EstimatorKind::DoublyRobust => "DR",
            EstimatorKind::Dml => "DML",
            EstimatorKind::Ipsw => "IPSW",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::all()
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::invalid(format!("estimator out of scope: '{s}'")))
    }

    pub fn all() -> &'static [EstimatorKind] {
        &[
            EstimatorKind::SLearner,
            EstimatorKind::TLearner,
            EstimatorKind::XLearner,
            EstimatorKind::DoublyRobust,
            EstimatorKind::Dml,
            EstimatorKind::Ipsw,
        ]
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One point of the candidate-model search space: an estimator paired with
/// a base-learner assignment shared by all of its internal learners.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSpec {
    pub estimator: EstimatorKind,
    pub learner: LearnerSpec,
}

impl CandidateSpec {
    pub fn new(estimator: EstimatorKind, learner: LearnerSpec) -> Self {
        CandidateSpec { estimator, learner }
    }

    /// `estimator/family/hyper_id` — the join key used across all result
    /// files.
    pub fn id(&self) -> String {
        format!(
            "{}/{}/{}",
            self.estimator.name(),
            self.learner.family().name(),
            self.learner.hyper_id()
        )
    }
}

impl fmt::Display for CandidateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Clone)]
pub(crate) enum CandidateModel {
    /// Single regressor on (x ⊕ t).
    S { model: FittedLearner },
    /// Arm-wise regressors; also used by IPSW whose arms are weighted.
    T { mu0: FittedLearner, mu1: FittedLearner },
    /// Propensity-weighted blend of imputed-effect regressors.
    X { tau0: FittedLearner, tau1: FittedLearner, propensity: FittedLearner },
    /// Cross-fitted nuisance models (kept for outcome heads) plus the final
    /// pseudo-outcome regressor.
    Dr { fold_mu0: Vec<FittedLearner>, fold_mu1: Vec<FittedLearner>, effect: FittedLearner },
    /// Linear effect model on residualized data.
    Dml { model: LinearCate },
}

/// A trained candidate. `predict_cate` is total on inputs with the training
/// dimensionality; outcome heads exist only where the estimator provides
/// per-arm predictions.
#[derive(Debug, Clone)]
pub struct FittedCandidate {
    spec: CandidateSpec,
    input_dim: usize,
    model: CandidateModel,
    diagnostics: Vec<String>,
}

impl FittedCandidate {
    pub(crate) fn from_parts(
        spec: CandidateSpec,
        input_dim: usize,
        model: CandidateModel,
        diagnostics: Vec<String>,
    ) -> Self {
        FittedCandidate { spec, input_dim, model, diagnostics }
    }

    pub fn spec(&self) -> &CandidateSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Notes recorded during fitting (e.g. the DML ridge fallback).
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    /// Whether per-arm outcome heads exist, which gates μ-risk.
    pub fn has_outcomes(&self) -> bool {
        matches!(
            self.model,
            CandidateModel::S { .. } | CandidateModel::T { .. } | CandidateModel::Dr { .. }
        )
    }

    /// Whether the candidate participates in μ-risk_R. Follows the
    /// availability matrix: SL, TL and IPSW only; DR exposes heads for
    /// μ-risk but stays out of the R² variant.
    pub fn mu_risk_r2_eligible(&self) -> bool {
        matches!(self.model, CandidateModel::S { .. } | CandidateModel::T { .. })
    }

    fn check_dims(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.input_dim {
            return Err(Error::invalid(format!(
                "{}: input has {} features, trained on {}",
                self.spec.id(),
                x.ncols(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// τ̂(x) for each row. Empty input produces an empty vector.
    pub fn predict_cate(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        if x.nrows() == 0 {
            return Ok(Vec::new());
        }
        match &self.model {
            CandidateModel::S { model } => {
                let mu1 = model.predict(append_treatment(x, 1.0).view())?;
                let mu0 = model.predict(append_treatment(x, 0.0).view())?;
                Ok(mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect())
            }
            CandidateModel::T { mu0, mu1 } => {
                let p1 = mu1.predict(x)?;
                let p0 = mu0.predict(x)?;
                Ok(p1.iter().zip(&p0).map(|(a, b)| a - b).collect())
            }
            CandidateModel::X { tau0, tau1, propensity } => {
                let t0 = tau0.predict(x)?;
                let t1 = tau1.predict(x)?;
                let e = propensity.predict(x)?;
                Ok((0..x.nrows()).map(|i| e[i] * t0[i] + (1.0 - e[i]) * t1[i]).collect())
            }
            CandidateModel::Dr { effect, .. } => effect.predict(x),
            CandidateModel::Dml { model } => Ok(model.predict(x)),
        }
    }

    /// Per-arm outcome heads `(μ̂0, μ̂1)`, or `None` when the estimator does
    /// not provide them. DR heads average its cross-fit fold models.
    pub fn predict_outcomes(&self, x: ArrayView2<'_, f64>) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        self.check_dims(x)?;
        match &self.model {
            CandidateModel::S { model } => {
                let mu0 = model.predict(append_treatment(x, 0.0).view())?;
                let mu1 = model.predict(append_treatment(x, 1.0).view())?;
                Ok(Some((mu0, mu1)))
            }
            CandidateModel::T { mu0, mu1 } => Ok(Some((mu0.predict(x)?, mu1.predict(x)?))),
            CandidateModel::Dr { fold_mu0, fold_mu1, .. } => {
                let mu0 = average_predictions(fold_mu0, x)?;
                let mu1 = average_predictions(fold_mu1, x)?;
                Ok(Some((mu0, mu1)))
            }
            CandidateModel::X { .. } | CandidateModel::Dml { .. } => Ok(None),
        }
    }
}

fn average_predictions(models: &[FittedLearner], x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; x.nrows()];
    for m in models {
        for (a, p) in acc.iter_mut().zip(m.predict(x)?) {
            *a += p;
        }
    }
    let k = models.len() as f64;
    for a in &mut acc {
        *a /= k;
    }
    Ok(acc)
}

/// Appends a constant treatment column to a covariate matrix.
pub(crate) fn append_treatment(x: ArrayView2<'_, f64>, t: f64) -> Array2<f64> {
    let (n, d) = (x.nrows(), x.ncols());
    let mut out = Array2::<f64>::zeros((n, d + 1));
    out.slice_mut(ndarray::s![.., ..d]).assign(&x);
    out.column_mut(d).fill(t);
    out
}

/// Appends the observed per-row treatment column.
pub(crate) fn append_treatment_col(x: ArrayView2<'_, f64>, t: &[u8]) -> Array2<f64> {
    let (n, d) = (x.nrows(), x.ncols());
    let mut out = Array2::<f64>::zeros((n, d + 1));
    out.slice_mut(ndarray::s![.., ..d]).assign(&x);
    for (i, &ti) in t.iter().enumerate() {
        out[[i, d]] = ti as f64;
    }
    out
}

/// Gathers one arm's rows (and optional per-unit weights) from a view.
pub(crate) fn arm_data(
    view: &DataView,
    arm: u8,
    weights: Option<&[f64]>,
) -> (Array2<f64>, Vec<f64>, Option<Vec<f64>>) {
    let idx: Vec<usize> = (0..view.n()).filter(|&i| view.t[i] == arm).collect();
    let mut x = Array2::<f64>::zeros((idx.len(), view.dim()));
    let mut y = Vec::with_capacity(idx.len());
    for (r, &i) in idx.iter().enumerate() {
        x.row_mut(r).assign(&view.x.row(i));
        y.push(view.yf[i]);
    }
    let w = weights.map(|w| idx.iter().map(|&i| w[i]).collect());
    (x, y, w)
}

/// Settings shared by every candidate fit.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub fit: FitContext,
    /// Folds for estimators that cross-fit internally (DR, DML).
    pub n_crossfit: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { fit: FitContext::default(), n_crossfit: 5 }
    }
}

impl EstimatorConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        EstimatorConfig { fit: self.fit.with_seed(seed), n_crossfit: self.n_crossfit }
    }
}

/// Fits any candidate on a training view. Underlying learner errors carry
/// the candidate id as context.
pub fn fit_candidate(
    spec: &CandidateSpec,
    train: &DataView,
    cfg: &EstimatorConfig,
) -> Result<FittedCandidate> {
    let result = match spec.estimator {
        EstimatorKind::SLearner => meta_learners::fit_s_learner(spec, train, cfg),
        EstimatorKind::TLearner => meta_learners::fit_t_learner(spec, train, cfg),
        EstimatorKind::XLearner => meta_learners::fit_x_learner(spec, train, cfg),
        EstimatorKind::Ipsw => meta_learners::fit_ipsw_learner(spec, train, cfg),
        EstimatorKind::DoublyRobust => orthogonal::fit_dr_learner(spec, train, cfg),
        EstimatorKind::Dml => orthogonal::fit_dml_learner(spec, train, cfg),
    };
    result.map_err(|e| match e {
        Error::InvalidInput(msg) => Error::invalid(format!("candidate {}: {msg}", spec.id())),
        other => other,
    })
}
