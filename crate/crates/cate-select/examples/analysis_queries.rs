//! The full analysis-report menu over one grid run: winners, oracle,
//! regret, rank correlations, ground-truth metric correlations, and the
//! defaults-versus-oracle comparison.
//!
//! ```bash
//! cargo run --example analysis_queries
//! ```

use cate_select::data::{build_split_plan, gen_partially_linear, DataSource};
use cate_select::estimators::{CandidateSpec, EstimatorKind};
use cate_select::harness::{aggregate_and_merge, report, run_grid, MetricsConfig, RunSettings};
use cate_select::learners::{reduced_grid, LearnerFamily};
use cate_select::metrics::names;

fn main() -> cate_select::Result<()> {
    let ds = gen_partially_linear(500, 3, 2.0, 1.0, 0.8, 7)?;
    let source = DataSource::Single(ds);
    let plan = build_split_plan(&source, 3, 0.15, 5, 7)?;

    let mut candidates = Vec::new();
    for family in [LearnerFamily::L2Linear, LearnerFamily::Tree] {
        for learner in reduced_grid(family) {
            for &estimator in EstimatorKind::all() {
                candidates.push(CandidateSpec::new(estimator, learner.clone()));
            }
        }
    }

    let mut settings = RunSettings {
        seed: 7,
        metrics: MetricsConfig::minimal(),
        ..Default::default()
    };
    settings.metrics.match_ks = vec![1, 3];
    settings.metrics.match_flavors = cate_select::metrics::TauRiskFlavor::all().to_vec();
    settings.metrics.test_metrics = vec![names::PEHE.to_string(), names::E_ATE.to_string()];

    let records = run_grid(&source, &plan, &candidates, &settings)?;
    let table = aggregate_and_merge(&records)?;

    println!("== winners (mean ± stderr of the picked candidates' test scores) ==");
    print!("{}", report::winners_report(&table)?);

    println!("\n== regret against each test metric ==");
    print!("{}", report::regret_report(&table)?);

    println!("\n== rank correlations (raw orientation) ==");
    print!("{}", report::rank_corr_report(&table)?);

    println!("\n== oracle picks ==");
    for line in report::oracle_report(&table)?.lines() {
        // picks are long; show the summary column only
        let mut parts = line.splitn(3, ',');
        let (a, b) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
        println!("{a},{b}");
    }

    println!("\n== correlations between ground-truth metrics ==");
    print!("{}", report::truth_corr_report(&table, names::E_ATE, names::PEHE)?);

    println!("\n== defaults vs oracle (per estimator × family) ==");
    print!(
        "{}",
        report::defaults_vs_oracle_report(
            &table,
            &[names::E_ATE.to_string(), names::PEHE.to_string()]
        )?
    );
    Ok(())
}
