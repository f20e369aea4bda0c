//! End-to-end pipeline on synthetic data: split → grid run → aggregate →
//! winner/oracle queries. The CLI wraps exactly these calls.
//!
//! ```bash
//! cargo run --example pipeline
//! ```

use cate_select::data::{build_split_plan, gen_partially_linear, DataSource};
use cate_select::estimators::{CandidateSpec, EstimatorKind};
use cate_select::harness::analysis::{oracle_select, regret, select_winner};
use cate_select::harness::{aggregate_and_merge, run_grid, MetricsConfig, RunSettings};
use cate_select::learners::{reduced_grid, LearnerFamily};
use cate_select::metrics::names;

fn main() -> cate_select::Result<()> {
    // stage 1: data and stored splits
    let ds = gen_partially_linear(500, 3, 2.0, 1.0, 0.8, 42)?;
    let source = DataSource::Single(ds);
    let plan = build_split_plan(&source, 3, 0.15, 5, 42)?;

    // candidate grid: three estimators × reduced ridge/tree grids
    let mut candidates = Vec::new();
    for family in [LearnerFamily::L2Linear, LearnerFamily::Tree] {
        for learner in reduced_grid(family) {
            for estimator in
                [EstimatorKind::SLearner, EstimatorKind::TLearner, EstimatorKind::DoublyRobust]
            {
                candidates.push(CandidateSpec::new(estimator, learner.clone()));
            }
        }
    }
    println!("grid: {} candidates, {} iterations", candidates.len(), plan.iterations.len());

    // stage 2: run with factual metrics plus matching
    let mut settings = RunSettings {
        seed: 42,
        metrics: MetricsConfig::minimal(),
        ..Default::default()
    };
    settings.metrics.match_ks = vec![1];
    settings.metrics.match_flavors = vec![cate_select::metrics::TauRiskFlavor::Pehe];
    let records = run_grid(&source, &plan, &candidates, &settings)?;
    println!("stage 2 produced {} metric records", records.len());

    // stage 3: fold-average and merge with test scores
    let table = aggregate_and_merge(&records)?;
    println!(
        "stage 3 table: {} rows, validation columns {:?}, test columns {:?}",
        table.rows.len(),
        table.val_metrics,
        table.test_metrics
    );

    // stage 4: selection queries per iteration
    for iter in table.iterations() {
        let by_mu = select_winner(&table, names::MU_RISK, iter)?;
        let (oracle, oracle_pehe) = oracle_select(&table, names::PEHE, iter)?;
        let r = regret(&table, names::MU_RISK, names::PEHE, iter)?;
        println!(
            "iter {iter}: μ-risk picks {by_mu}; oracle {oracle} (PEHE {oracle_pehe:.3}); regret {r:.3}"
        );
    }
    Ok(())
}
