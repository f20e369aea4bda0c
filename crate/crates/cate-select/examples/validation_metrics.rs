//! The validation-metric menu evaluated for one candidate on one
//! validation fold: μ-risk and its R² variant, plugin and matching
//! τ-risks, the R-score, and validation policy risk.
//!
//! ```bash
//! cargo run --example validation_metrics
//! ```

use cate_select::data::gen_partially_linear;
use cate_select::estimators::{fit_candidate, CandidateSpec, EstimatorConfig, EstimatorKind};
use cate_select::learners::{default_spec, FitContext, LearnerFamily};
use cate_select::metrics::matching::tau_risk_match;
use cate_select::metrics::mu::{mu_risk, mu_risk_r2};
use cate_select::metrics::plugin::{build_plugin_truth, tau_risk_plugin, PluginBuilder, PluginEstimator};
use cate_select::metrics::rscore::{fit_rscore_nuisances, tau_risk_r};
use cate_select::metrics::truth::policy_risk;
use cate_select::metrics::{AuxLearner, MetricOutcome, TauRiskFlavor};

fn show(name: &str, outcome: MetricOutcome) {
    match outcome {
        MetricOutcome::Value(v) => println!("{name:<28} {v:>9.4}"),
        MetricOutcome::Unavailable(reason) => println!("{name:<28}        NA ({reason})"),
    }
}

fn main() -> cate_select::Result<()> {
    let train = gen_partially_linear(600, 3, 2.0, 0.8, 0.7, 11)?;
    let val = gen_partially_linear(200, 3, 2.0, 0.8, 0.7, 12)?.full_view();

    let spec = CandidateSpec::new(EstimatorKind::TLearner, default_spec(LearnerFamily::Tree));
    let fc = fit_candidate(&spec, &train.full_view(), &EstimatorConfig::default())?;
    let tau_hat = fc.predict_cate(val.x.view())?;
    println!("candidate: {}\n", fc.spec().id());

    show("mu_risk", mu_risk(&fc, &val)?);
    show("mu_risk_r2", mu_risk_r2(&fc, &val)?);

    // plugin truth: an auxiliary estimator fitted on the validation fold
    let fit = FitContext { ensemble_size: 40, learning_rate: 0.1, seed: 0 };
    let builder = PluginBuilder { estimator: PluginEstimator::TLearner, learner: AuxLearner::Kr };
    let plugin = build_plugin_truth(builder, &val, 21, &fit)?;
    println!("plugin {} picked {}", builder.label(), plugin.chosen_hyper);
    show("tau_plugin_pehe/TL-KR", tau_risk_plugin(&tau_hat, &plugin, TauRiskFlavor::Pehe)?);
    show("tau_plugin_ate/TL-KR", tau_risk_plugin(&tau_hat, &plugin, TauRiskFlavor::Ate)?);

    // matching truth from opposite-arm nearest neighbours
    for k in [1, 3, 5] {
        show(
            &format!("tau_match_pehe/k{k}"),
            tau_risk_match(&tau_hat, &val, k, TauRiskFlavor::Pehe)?,
        );
    }

    // R-score against the best linear effect model on residualized data
    let nuis = fit_rscore_nuisances(AuxLearner::Gbt, &val, 31, &fit)?;
    println!("rscore nuisances: m̂ {} | ê {}", nuis.m_hyper, nuis.e_hyper);
    show("tau_rscore/gbt", tau_risk_r(&tau_hat, &val, &nuis)?);

    // validation policy risk (same formula as the test-side metric)
    let report = policy_risk(&tau_hat, &val)?;
    show("policy_risk", MetricOutcome::Value(report.value));
    Ok(())
}
