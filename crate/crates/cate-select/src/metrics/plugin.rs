//! Plugin validation: an auxiliary CATE estimator fitted on the validation
//! set supplies pseudo-effects τ̃ that candidates are scored against.
//!
//! Building a plugin truth has two phases. Inner model selection picks the
//! builder's hyperparameters by factual-outcome R² under stratified 5-fold
//! cross-validation; the winning assignment is then realized by 5-fold
//! cross-fitting so every validation unit's τ̃ is an out-of-fold
//! prediction.

use super::mu::r_squared;
use super::{check_equal_lengths, AuxLearner, MetricOutcome, TauRiskFlavor};
use crate::data::DataView;
use crate::error::{Error, Result};
use crate::estimators::crossfit::{fold_complement, stratified_folds, OutOfFold};
use crate::estimators::{fit_candidate, CandidateSpec, EstimatorConfig, EstimatorKind};
use crate::learners::{expand_grid, FitContext, LearnerSpec};
use crate::metrics::truth::pehe;
use crate::numeric::{child_seed, mean};
use serde::{Deserialize, Serialize};

const SELECTION_FOLDS: usize = 5;

/// Which estimator shape the plugin builder uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PluginEstimator {
    #[serde(rename = "SL")]
    SLearner,
    #[serde(rename = "TL")]
    TLearner,
}

impl PluginEstimator {
    fn kind(self) -> EstimatorKind {
        match self {
            PluginEstimator::SLearner => EstimatorKind::SLearner,
            PluginEstimator::TLearner => EstimatorKind::TLearner,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PluginEstimator::SLearner => "SL",
            PluginEstimator::TLearner => "TL",
        }
    }
}

/// One plugin builder variant: {SL, TL} × {DT, GBT, KR}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluginBuilder {
    pub estimator: PluginEstimator,
    pub learner: AuxLearner,
}

impl PluginBuilder {
    pub fn label(&self) -> String {
        format!("{}-{}", self.estimator.label(), self.learner.label_upper())
    }

    /// The full builder menu in deterministic order.
    pub fn all() -> Vec<PluginBuilder> {
        let mut out = Vec::with_capacity(6);
        for estimator in [PluginEstimator::SLearner, PluginEstimator::TLearner] {
            for learner in AuxLearner::all() {
                out.push(PluginBuilder { estimator, learner });
            }
        }
        out
    }
}

/// Pseudo ground truth over one validation fold.
#[derive(Debug, Clone)]
pub struct PluginTruth {
    pub tau_tilde: Vec<f64>,
    pub builder: PluginBuilder,
    /// Hyperparameter assignment the inner selection chose.
    pub chosen_hyper: String,
}

/// Average out-of-fold factual-outcome R² of one builder spec under
/// stratified CV; `None` when no fold was scoreable or a fit failed.
fn cv_r2_score(
    spec: &CandidateSpec,
    val: &DataView,
    folds: &[Vec<usize>],
    est_cfg: &EstimatorConfig,
) -> Option<f64> {
    let mut scores = Vec::new();
    for fold in folds {
        let fit_rows = fold_complement(val.n(), fold);
        let fit_view = val.subset(&fit_rows);
        let hold_view = val.subset(fold);
        let fc = fit_candidate(spec, &fit_view, est_cfg).ok()?;
        let (mu0, mu1) = fc.predict_outcomes(hold_view.x.view()).ok()??;
        let pred: Vec<f64> = (0..hold_view.n())
            .map(|i| if hold_view.t[i] == 1 { mu1[i] } else { mu0[i] })
            .collect();
        if let Some(r2) = r_squared(&hold_view.yf, &pred) {
            scores.push(r2);
        }
    }
    if scores.is_empty() {
        None
    } else {
        Some(mean(&scores))
    }
}

fn select_builder_spec(
    builder: PluginBuilder,
    val: &DataView,
    seed: u64,
    fit: &FitContext,
) -> Result<LearnerSpec> {
    let grid = expand_grid(builder.learner.family());
    let folds = stratified_folds(&val.t, SELECTION_FOLDS, child_seed(seed, "plugin-select"))?;
    let mut best: Option<(f64, LearnerSpec)> = None;
    for (g, learner_spec) in grid.into_iter().enumerate() {
        let spec = CandidateSpec::new(builder.estimator.kind(), learner_spec.clone());
        let est_cfg = EstimatorConfig {
            fit: fit.with_seed(child_seed(seed, &format!("plugin-cv-{g}"))),
            n_crossfit: SELECTION_FOLDS,
        };
        if let Some(score) = cv_r2_score(&spec, val, &folds, &est_cfg) {
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, learner_spec));
            }
        }
    }
    best.map(|(_, s)| s).ok_or_else(|| {
        Error::invalid(format!(
            "plugin builder {}: every grid point failed inner selection",
            builder.label()
        ))
    })
}

/// Builds τ̃ for one validation fold. Deterministic given the seed; every
/// unit's pseudo-effect is out-of-fold by construction.
pub fn build_plugin_truth(
    builder: PluginBuilder,
    val: &DataView,
    seed: u64,
    fit: &FitContext,
) -> Result<PluginTruth> {
    for (name, count) in
        [("treated", val.treated_indices().len()), ("control", val.control_indices().len())]
    {
        if count < SELECTION_FOLDS {
            return Err(Error::invalid(format!(
                "plugin truth needs at least {SELECTION_FOLDS} {name} units in the validation fold, found {count}"
            )));
        }
    }
    let chosen = select_builder_spec(builder, val, seed, fit)?;

    let folds = stratified_folds(&val.t, SELECTION_FOLDS, child_seed(seed, "plugin-crossfit"))?;
    let mut oof = OutOfFold::new(val.n(), "plugin-tau");
    for (f, fold) in folds.iter().enumerate() {
        let fit_rows = fold_complement(val.n(), fold);
        let fit_view = val.subset(&fit_rows);
        let hold_view = val.subset(fold);
        let spec = CandidateSpec::new(builder.estimator.kind(), chosen.clone());
        let est_cfg = EstimatorConfig {
            fit: fit.with_seed(child_seed(seed, &format!("plugin-fit-{f}"))),
            n_crossfit: SELECTION_FOLDS,
        };
        let fc = fit_candidate(&spec, &fit_view, &est_cfg)?;
        oof.set_fold(fold, &fc.predict_cate(hold_view.x.view())?)?;
    }
    Ok(PluginTruth { tau_tilde: oof.into_vec()?, builder, chosen_hyper: chosen.hyper_id() })
}

/// Scores candidate effects against a plugin truth. PEHE flavor is the
/// root mean squared deviation; ATE flavor the absolute mean gap.
pub fn tau_risk_plugin(
    tau_hat_val: &[f64],
    plugin: &PluginTruth,
    flavor: TauRiskFlavor,
) -> Result<MetricOutcome> {
    check_equal_lengths(tau_hat_val, &plugin.tau_tilde)?;
    let v = match flavor {
        TauRiskFlavor::Pehe => pehe(tau_hat_val, &plugin.tau_tilde)?,
        TauRiskFlavor::Ate => (mean(tau_hat_val) - mean(&plugin.tau_tilde)).abs(),
    };
    Ok(MetricOutcome::Value(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_partially_linear;
    use approx::assert_abs_diff_eq;

    fn fast_fit() -> FitContext {
        FitContext { ensemble_size: 20, learning_rate: 0.1, seed: 0 }
    }

    #[test]
    fn plugin_truth_covers_every_unit_and_is_deterministic() {
        let ds = gen_partially_linear(80, 2, 1.0, 0.5, 0.5, 31).unwrap();
        let val = ds.full_view();
        let builder = PluginBuilder { estimator: PluginEstimator::SLearner, learner: AuxLearner::Dt };
        let a = build_plugin_truth(builder, &val, 5, &fast_fit()).unwrap();
        let b = build_plugin_truth(builder, &val, 5, &fast_fit()).unwrap();
        assert_eq!(a.tau_tilde.len(), val.n());
        assert_eq!(a.tau_tilde, b.tau_tilde);
        assert!(a.tau_tilde.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn plugin_recovers_constant_effect_on_clean_data() {
        // noiseless constant effect: even a tree-based builder should see
        // a near-constant τ̃ close to theta
        let ds = gen_partially_linear(150, 1, 2.0, 0.0, 0.0, 13).unwrap();
        let val = ds.full_view();
        let builder = PluginBuilder { estimator: PluginEstimator::TLearner, learner: AuxLearner::Dt };
        let truth = build_plugin_truth(builder, &val, 7, &fast_fit()).unwrap();
        let avg = mean(&truth.tau_tilde);
        assert_abs_diff_eq!(avg, 2.0, epsilon = 0.2);
    }

    #[test]
    fn flavors_and_shift_invariance() {
        let plugin = PluginTruth {
            tau_tilde: vec![0.0, 2.0],
            builder: PluginBuilder { estimator: PluginEstimator::SLearner, learner: AuxLearner::Kr },
            chosen_hyper: String::new(),
        };
        // τ̂ = (1,1) vs τ̃ = (0,2): PEHE 1, ATE 0
        let p = tau_risk_plugin(&[1.0, 1.0], &plugin, TauRiskFlavor::Pehe).unwrap();
        assert_abs_diff_eq!(p.value().unwrap(), 1.0, epsilon = 1e-12);
        let a = tau_risk_plugin(&[1.0, 1.0], &plugin, TauRiskFlavor::Ate).unwrap();
        assert_abs_diff_eq!(a.value().unwrap(), 0.0, epsilon = 1e-12);

        // τ̂ = τ̃ → 0 under both flavors
        let z = tau_risk_plugin(&[0.0, 2.0], &plugin, TauRiskFlavor::Pehe).unwrap();
        assert_eq!(z.value().unwrap(), 0.0);

        // constant shift c moves both flavors by |c|
        let s = tau_risk_plugin(&[0.5, 2.5], &plugin, TauRiskFlavor::Pehe).unwrap();
        assert_abs_diff_eq!(s.value().unwrap(), 0.5, epsilon = 1e-12);
        let s = tau_risk_plugin(&[0.5, 2.5], &plugin, TauRiskFlavor::Ate).unwrap();
        assert_abs_diff_eq!(s.value().unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn tiny_arms_are_rejected() {
        let ds = gen_partially_linear(20, 1, 1.0, 0.0, 0.5, 3).unwrap();
        // keep only 3 treated units
        let treated = ds.treated_indices();
        let control = ds.control_indices();
        let mut idx: Vec<usize> = treated.into_iter().take(3).collect();
        idx.extend(control);
        let val = ds.view(&idx);
        let builder = PluginBuilder { estimator: PluginEstimator::SLearner, learner: AuxLearner::Dt };
        let err = build_plugin_truth(builder, &val, 1, &fast_fit()).unwrap_err();
        assert!(err.to_string().contains("at least 5"), "{err}");
    }
}
