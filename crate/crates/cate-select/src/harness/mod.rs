//! Grid execution over a split plan (Stage 2), record aggregation
//! (Stage 3), and the analysis queries (Stage 4).

pub mod analysis;
pub mod record;
pub mod report;
pub mod table;

pub use record::{read_records_csv, sort_records, write_records_csv, MetricRecord};
pub use table::{aggregate_and_merge, write_results_csv, ResultsTable};

use crate::data::{DataSource, SplitPlan};
use crate::error::{Error, Result};
use crate::estimators::{fit_candidate, CandidateSpec, EstimatorConfig, FittedCandidate};
use crate::metrics::plugin::{build_plugin_truth, tau_risk_plugin, PluginBuilder, PluginTruth};
use crate::metrics::rscore::{fit_rscore_nuisances, tau_risk_r, NuisancePair};
use crate::metrics::{matching, mu, names, truth, AuxLearner, MetricOutcome, TauRiskFlavor};
use crate::numeric::child_seed;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Which metrics a run computes. Validation metrics expand into one named
/// column per variant (builder × flavor, k × flavor, nuisance family).
#[derive(Debug, Clone)]
pub struct MetricsConfig {
    pub mu_risk: bool,
    pub mu_risk_r2: bool,
    pub plugin_builders: Vec<PluginBuilder>,
    pub plugin_flavors: Vec<TauRiskFlavor>,
    pub match_ks: Vec<usize>,
    pub match_flavors: Vec<TauRiskFlavor>,
    pub rscore_learners: Vec<AuxLearner>,
    pub policy_risk_val: bool,
    /// Test metric names from [`names`]: pehe, e_ate, e_att, policy_risk.
    pub test_metrics: Vec<String>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            mu_risk: true,
            mu_risk_r2: true,
            plugin_builders: PluginBuilder::all(),
            plugin_flavors: TauRiskFlavor::all().to_vec(),
            match_ks: vec![1, 3, 5],
            match_flavors: TauRiskFlavor::all().to_vec(),
            rscore_learners: AuxLearner::all().to_vec(),
            policy_risk_val: true,
            test_metrics: vec![
                names::PEHE.to_string(),
                names::E_ATE.to_string(),
                names::E_ATT.to_string(),
                names::POLICY_RISK.to_string(),
            ],
        }
    }
}

impl MetricsConfig {
    /// A light configuration for smoke runs: factual metrics only.
    pub fn minimal() -> Self {
        MetricsConfig {
            mu_risk: true,
            mu_risk_r2: true,
            plugin_builders: Vec::new(),
            plugin_flavors: Vec::new(),
            match_ks: Vec::new(),
            match_flavors: Vec::new(),
            rscore_learners: Vec::new(),
            policy_risk_val: false,
            test_metrics: vec![names::PEHE.to_string(), names::E_ATE.to_string()],
        }
    }

    /// The validation column names this configuration produces.
    pub fn validation_metric_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.mu_risk {
            out.push(names::MU_RISK.to_string());
        }
        if self.mu_risk_r2 {
            out.push(names::MU_RISK_R2.to_string());
        }
        for b in &self.plugin_builders {
            for &fl in &self.plugin_flavors {
                out.push(names::tau_plugin(fl, b.estimator.label(), b.learner));
            }
        }
        for &k in &self.match_ks {
            for &fl in &self.match_flavors {
                out.push(names::tau_match(fl, k));
            }
        }
        for &l in &self.rscore_learners {
            out.push(names::tau_rscore(l));
        }
        if self.policy_risk_val {
            out.push(names::POLICY_RISK.to_string());
        }
        out
    }
}

/// Everything a grid run needs besides the plan and candidates.
#[derive(Debug, Clone)]
#[derive(Default)]
pub struct RunSettings {
    pub metrics: MetricsConfig,
    pub estimator: EstimatorConfig,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub parallelism: usize,
}


/// Shared per-(iteration, fold) validation assets, built once and read by
/// every candidate scored on that fold. Failures are recorded and surface
/// as unavailable metric values rather than aborting the run.
struct FoldAssets {
    plugins: Vec<(PluginBuilder, std::result::Result<PluginTruth, String>)>,
    match_truths: Vec<(usize, std::result::Result<Vec<f64>, String>)>,
    nuisances: Vec<(AuxLearner, std::result::Result<NuisancePair, String>)>,
}

fn build_fold_assets(
    val: &crate::data::DataView,
    settings: &RunSettings,
    iter: usize,
    fold: usize,
) -> FoldAssets {
    let cfg = &settings.metrics;
    let plugins = cfg
        .plugin_builders
        .iter()
        .map(|&b| {
            let seed = child_seed(settings.seed, &format!("plugin|{}|it{iter}|f{fold}", b.label()));
            (b, build_plugin_truth(b, val, seed, &settings.estimator.fit).map_err(|e| e.to_string()))
        })
        .collect();
    let match_truths = cfg
        .match_ks
        .iter()
        .map(|&k| (k, matching::tau_match_truth(val, k).map_err(|e| e.to_string())))
        .collect();
    let nuisances = cfg
        .rscore_learners
        .iter()
        .map(|&l| {
            let seed = child_seed(settings.seed, &format!("rscore|{l}|it{iter}|f{fold}"));
            (l, fit_rscore_nuisances(l, val, seed, &settings.estimator.fit).map_err(|e| e.to_string()))
        })
        .collect();
    FoldAssets { plugins, match_truths, nuisances }
}

fn push_all_unavailable(
    records: &mut Vec<MetricRecord>,
    candidate: &str,
    iter: usize,
    fold: Option<usize>,
    metric_names: &[String],
    reason: &str,
) {
    for m in metric_names {
        records.push(MetricRecord {
            candidate: candidate.to_string(),
            iter,
            fold,
            metric: m.clone(),
            value: MetricOutcome::unavailable(reason),
        });
    }
}

fn validation_records(
    fc: &FittedCandidate,
    val: &crate::data::DataView,
    assets: &FoldAssets,
    cfg: &MetricsConfig,
    iter: usize,
    fold: usize,
) -> Vec<MetricRecord> {
    let candidate = fc.spec().id();
    let mut records = Vec::new();
    let mut push = |metric: String, value: MetricOutcome| {
        records.push(MetricRecord { candidate: candidate.clone(), iter, fold: Some(fold), metric, value });
    };
    let to_outcome = |r: Result<MetricOutcome>| match r {
        Ok(v) => v,
        Err(e) => MetricOutcome::unavailable(e.to_string()),
    };

    if cfg.mu_risk {
        push(names::MU_RISK.to_string(), to_outcome(mu::mu_risk(fc, val)));
    }
    if cfg.mu_risk_r2 {
        push(names::MU_RISK_R2.to_string(), to_outcome(mu::mu_risk_r2(fc, val)));
    }

    let tau_hat = fc.predict_cate(val.x.view());
    let tau_hat = match tau_hat {
        Ok(v) => v,
        Err(e) => {
            // predictions failed: every effect-based metric is unavailable
            let reason = e.to_string();
            for (b, _) in &assets.plugins {
                for &fl in &cfg.plugin_flavors {
                    push(names::tau_plugin(fl, b.estimator.label(), b.learner), MetricOutcome::unavailable(&reason));
                }
            }
            for (k, _) in &assets.match_truths {
                for &fl in &cfg.match_flavors {
                    push(names::tau_match(fl, *k), MetricOutcome::unavailable(&reason));
                }
            }
            for (l, _) in &assets.nuisances {
                push(names::tau_rscore(*l), MetricOutcome::unavailable(&reason));
            }
            if cfg.policy_risk_val {
                push(names::POLICY_RISK.to_string(), MetricOutcome::unavailable(&reason));
            }
            return records;
        }
    };

    for (b, plugin) in &assets.plugins {
        for &fl in &cfg.plugin_flavors {
            let name = names::tau_plugin(fl, b.estimator.label(), b.learner);
            let value = match plugin {
                Ok(p) => to_outcome(tau_risk_plugin(&tau_hat, p, fl)),
                Err(reason) => MetricOutcome::unavailable(format!("plugin truth failed: {reason}")),
            };
            push(name, value);
        }
    }
    for (k, tilde) in &assets.match_truths {
        for &fl in &cfg.match_flavors {
            let name = names::tau_match(fl, *k);
            let value = match tilde {
                Ok(tt) => {
                    let v = match fl {
                        TauRiskFlavor::Pehe => truth::pehe(&tau_hat, tt).map(MetricOutcome::Value),
                        TauRiskFlavor::Ate => truth::e_ate(&tau_hat, tt).map(MetricOutcome::Value),
                    };
                    to_outcome(v)
                }
                Err(reason) => MetricOutcome::unavailable(format!("matching truth failed: {reason}")),
            };
            push(name, value);
        }
    }
    for (l, nuis) in &assets.nuisances {
        let name = names::tau_rscore(*l);
        let value = match nuis {
            Ok(np) => to_outcome(tau_risk_r(&tau_hat, val, np)),
            Err(reason) => MetricOutcome::unavailable(format!("nuisance fit failed: {reason}")),
        };
        push(name, value);
    }
    if cfg.policy_risk_val {
        let value = match truth::policy_risk(&tau_hat, val) {
            Ok(report) => MetricOutcome::Value(report.value),
            Err(e) => MetricOutcome::unavailable(e.to_string()),
        };
        push(names::POLICY_RISK.to_string(), value);
    }
    records
}

fn test_records(
    fc: &FittedCandidate,
    test: &crate::data::DataView,
    cfg: &MetricsConfig,
    iter: usize,
) -> Vec<MetricRecord> {
    let candidate = fc.spec().id();
    let mut records = Vec::new();
    let mut push = |metric: &str, value: MetricOutcome| {
        records.push(MetricRecord {
            candidate: candidate.clone(),
            iter,
            fold: None,
            metric: metric.to_string(),
            value,
        });
    };

    let tau_hat = match fc.predict_cate(test.x.view()) {
        Ok(v) => v,
        Err(e) => {
            for m in &cfg.test_metrics {
                push(m, MetricOutcome::unavailable(e.to_string()));
            }
            return records;
        }
    };
    let tau_true = test.tau_true();

    for m in &cfg.test_metrics {
        let value = match m.as_str() {
            names::PEHE => match &tau_true {
                Some(tt) => truth::pehe(&tau_hat, tt)
                    .map(MetricOutcome::Value)
                    .unwrap_or_else(|e| MetricOutcome::unavailable(e.to_string())),
                None => MetricOutcome::unavailable("no ground-truth effects in dataset"),
            },
            names::E_ATE => match &tau_true {
                Some(tt) => truth::e_ate(&tau_hat, tt)
                    .map(MetricOutcome::Value)
                    .unwrap_or_else(|e| MetricOutcome::unavailable(e.to_string())),
                None => MetricOutcome::unavailable("no ground-truth effects in dataset"),
            },
            names::E_ATT => truth::e_att(&tau_hat, test)
                .map(MetricOutcome::Value)
                .unwrap_or_else(|e| MetricOutcome::unavailable(e.to_string())),
            names::POLICY_RISK => truth::policy_risk(&tau_hat, test)
                .map(|r| MetricOutcome::Value(r.value))
                .unwrap_or_else(|e| MetricOutcome::unavailable(e.to_string())),
            other => MetricOutcome::unavailable(format!("unknown test metric '{other}'")),
        };
        push(m, value);
    }
    records
}

/// Runs every candidate over every (iteration, fold) of the plan, scoring
/// the configured validation metrics on fold validation sets and the test
/// metrics on held-out test sets. Individual candidate failures become
/// unavailable records; the run never aborts because of one candidate.
/// Output is sorted and independent of the parallelism degree.
pub fn run_grid(
    source: &DataSource,
    plan: &SplitPlan,
    candidates: &[CandidateSpec],
    settings: &RunSettings,
) -> Result<Vec<MetricRecord>> {
    if candidates.is_empty() {
        return Err(Error::invalid("no candidates to run"));
    }
    plan.validate()?;
    {
        let mut ids: Vec<String> = candidates.iter().map(|c| c.id()).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != candidates.len() {
            return Err(Error::invalid("duplicate candidate specs in the grid"));
        }
    }
    for (i, it) in plan.iterations.iter().enumerate() {
        let n = source.dataset(i).n();
        let max = it.train_idx.iter().chain(&it.test_idx).max().copied().unwrap_or(0);
        if max >= n {
            return Err(Error::invalid(format!(
                "split plan iteration {i} references row {max}, dataset has {n} rows"
            )));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.parallelism)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;

    let val_names = settings.metrics.validation_metric_names();

    let records: Vec<MetricRecord> = pool.install(|| {
        // Stage-2 preparation: per-(iteration, fold) validation assets.
        let asset_keys: Vec<(usize, usize)> = plan
            .iterations
            .iter()
            .enumerate()
            .flat_map(|(i, it)| (0..it.folds.len()).map(move |f| (i, f)))
            .collect();
        let assets: BTreeMap<(usize, usize), FoldAssets> = asset_keys
            .par_iter()
            .map(|&(i, f)| {
                let ds = source.dataset(i);
                let val = ds.view(&plan.iterations[i].folds[f].val_idx);
                ((i, f), build_fold_assets(&val, settings, i, f))
            })
            .collect();

        let tasks: Vec<(usize, usize)> = (0..candidates.len())
            .flat_map(|c| (0..plan.iterations.len()).map(move |i| (c, i)))
            .collect();

        tasks
            .par_iter()
            .flat_map(|&(c, i)| {
                let spec = &candidates[c];
                let candidate_id = spec.id();
                let ds = source.dataset(i);
                let it = &plan.iterations[i];
                let mut out = Vec::new();

                for (f, fold) in it.folds.iter().enumerate() {
                    let fit_view = ds.view(&fold.fit_idx);
                    let val_view = ds.view(&fold.val_idx);
                    let est_cfg = settings.estimator.with_seed(child_seed(
                        settings.seed,
                        &format!("fit|{candidate_id}|it{i}|f{f}"),
                    ));
                    match fit_candidate(spec, &fit_view, &est_cfg) {
                        Ok(fc) => out.extend(validation_records(
                            &fc,
                            &val_view,
                            &assets[&(i, f)],
                            &settings.metrics,
                            i,
                            f,
                        )),
                        Err(e) => push_all_unavailable(
                            &mut out,
                            &candidate_id,
                            i,
                            Some(f),
                            &val_names,
                            &format!("fit failed: {e}"),
                        ),
                    }
                }

                let train_view = ds.view(&it.train_idx);
                let test_view = ds.view(&it.test_idx);
                let est_cfg = settings
                    .estimator
                    .with_seed(child_seed(settings.seed, &format!("fit|{candidate_id}|it{i}|test")));
                match fit_candidate(spec, &train_view, &est_cfg) {
                    Ok(fc) => out.extend(test_records(&fc, &test_view, &settings.metrics, i)),
                    Err(e) => push_all_unavailable(
                        &mut out,
                        &candidate_id,
                        i,
                        None,
                        &settings.metrics.test_metrics,
                        &format!("fit failed: {e}"),
                    ),
                }
                out
            })
            .collect()
    });

    let mut records = records;
    sort_records(&mut records);
    for pair in records.windows(2) {
        if pair[0].sort_key() == pair[1].sort_key() {
            return Err(Error::invalid(format!(
                "duplicate record key: {} iter {} metric {}",
                pair[0].candidate, pair[0].iter, pair[0].metric
            )));
        }
    }
    Ok(records)
}
