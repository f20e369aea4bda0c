//! CSV report writers for the analysis modes, one file shape per query.
//! Cells are `mean±stderr` strings over dataset iterations; unavailable
//! cells print as `NA` with a log line explaining why.

use super::analysis::{
    defaults_vs_oracle, oracle_select, rank_correlation, regret, select_winner, summarize, Scope,
};
use super::table::ResultsTable;
use crate::error::{Error, Result};
use crate::metrics::MetricOutcome;
use std::collections::BTreeSet;

fn csv_from_rows(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| Error::invalid(format!("csv write: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(format!("csv utf8: {e}")))
}

/// Test scores of each validation metric's per-iteration winners, plus the
/// oracle row: one row per selector, one column per test metric.
pub fn winners_report(table: &ResultsTable) -> Result<String> {
    let test_metrics = table.usable_test_metrics();
    let val_metrics = table.usable_val_metrics();
    let mut rows = Vec::new();
    let mut header = vec!["selector".to_string()];
    header.extend(test_metrics.iter().cloned());
    rows.push(header);

    for vm in &val_metrics {
        let mut row = vec![vm.clone()];
        for tm in &test_metrics {
            let mut values = Vec::new();
            for iter in table.iterations() {
                let picked = match select_winner(table, vm, iter) {
                    Ok(p) => p,
                    Err(e) => {
                        log::warn!("winners: {vm} iteration {iter} skipped: {e}");
                        continue;
                    }
                };
                if let Some(MetricOutcome::Value(v)) = table
                    .row(&picked, iter)
                    .and_then(|r| r.cells.get(&ResultsTable::test_column(tm)))
                {
                    values.push(*v);
                } else {
                    log::warn!("winners: {vm} iteration {iter}: winner {picked} has no {tm}");
                }
            }
            row.push(if values.is_empty() {
                "NA".to_string()
            } else {
                summarize(&values)?.format()
            });
        }
        rows.push(row);
    }

    // oracle row: per test metric, the per-iteration optimum
    let mut oracle_row = vec!["oracle".to_string()];
    for tm in &test_metrics {
        let mut values = Vec::new();
        for iter in table.iterations() {
            match oracle_select(table, tm, iter) {
                Ok((_, v)) => values.push(v),
                Err(e) => log::warn!("oracle: {tm} iteration {iter} skipped: {e}"),
            }
        }
        oracle_row.push(if values.is_empty() {
            "NA".to_string()
        } else {
            summarize(&values)?.format()
        });
    }
    rows.push(oracle_row);
    csv_from_rows(rows)
}

/// Oracle selections per test metric: summary plus the picked candidate
/// per iteration.
pub fn oracle_report(table: &ResultsTable) -> Result<String> {
    let mut rows = vec![vec![
        "test_metric".to_string(),
        "oracle".to_string(),
        "picks".to_string(),
    ]];
    for tm in table.usable_test_metrics() {
        let mut values = Vec::new();
        let mut picks = Vec::new();
        for iter in table.iterations() {
            match oracle_select(table, &tm, iter) {
                Ok((cand, v)) => {
                    values.push(v);
                    picks.push(format!("iter{iter}:{cand}"));
                }
                Err(e) => log::warn!("oracle: {tm} iteration {iter} skipped: {e}"),
            }
        }
        let cell = if values.is_empty() { "NA".to_string() } else { summarize(&values)?.format() };
        rows.push(vec![tm, cell, picks.join(";")]);
    }
    csv_from_rows(rows)
}

/// Mean ± stderr of per-iteration regrets, validation metrics × test
/// metrics.
pub fn regret_report(table: &ResultsTable) -> Result<String> {
    let test_metrics = table.usable_test_metrics();
    let mut rows = Vec::new();
    let mut header = vec!["selector".to_string()];
    header.extend(test_metrics.iter().cloned());
    rows.push(header);
    for vm in table.usable_val_metrics() {
        let mut row = vec![vm.clone()];
        for tm in &test_metrics {
            let mut values = Vec::new();
            for iter in table.iterations() {
                match regret(table, &vm, tm, iter) {
                    Ok(v) => values.push(v),
                    Err(e) => log::warn!("regret: ({vm}, {tm}) iteration {iter} skipped: {e}"),
                }
            }
            row.push(if values.is_empty() {
                "NA".to_string()
            } else {
                summarize(&values)?.format()
            });
        }
        rows.push(row);
    }
    csv_from_rows(rows)
}

/// Mean ± stderr of per-iteration Spearman correlations between validation
/// and test columns, in raw orientation.
pub fn rank_corr_report(table: &ResultsTable) -> Result<String> {
    let test_metrics = table.usable_test_metrics();
    let mut rows = Vec::new();
    let mut header = vec!["selector".to_string()];
    header.extend(test_metrics.iter().cloned());
    rows.push(header);
    for vm in table.usable_val_metrics() {
        let mut row = vec![vm.clone()];
        for tm in &test_metrics {
            let mut values = Vec::new();
            for iter in table.iterations() {
                match rank_correlation(table, &vm, tm, iter)? {
                    MetricOutcome::Value(v) => values.push(v),
                    MetricOutcome::Unavailable(reason) => {
                        log::warn!("rank-corr: ({vm}, {tm}) iteration {iter} unavailable: {reason}");
                    }
                }
            }
            row.push(if values.is_empty() {
                "NA".to_string()
            } else {
                summarize(&values)?.format()
            });
        }
        rows.push(row);
    }
    csv_from_rows(rows)
}

/// Correlations between two ground-truth metrics per estimator scope, per
/// learner scope, and pooled over everything.
pub fn truth_corr_report(table: &ResultsTable, metric_a: &str, metric_b: &str) -> Result<String> {
    let mut rows = vec![vec![
        "scope".to_string(),
        format!("corr({metric_a},{metric_b})"),
    ]];
    let estimators: BTreeSet<String> = table.rows.iter().map(|r| r.estimator.clone()).collect();
    let families: BTreeSet<String> = table.rows.iter().map(|r| r.family.clone()).collect();
    let mut scopes: Vec<Scope> = estimators.into_iter().map(Scope::Estimator).collect();
    scopes.extend(families.into_iter().map(Scope::Family));
    scopes.push(Scope::All);

    for scope in scopes {
        let cell = match super::analysis::truth_metric_correlation_summary(
            table, &scope, metric_a, metric_b,
        )? {
            Some(c) => c.format(),
            None => "NA".to_string(),
        };
        rows.push(vec![scope.label(), cell]);
    }
    csv_from_rows(rows)
}

/// Defaults-versus-oracle point pairs for plotting: one row per
/// (estimator, family), default and oracle summaries per metric.
pub fn defaults_vs_oracle_report(table: &ResultsTable, metrics: &[String]) -> Result<String> {
    let points = defaults_vs_oracle(table, metrics)?;
    let mut header = vec!["estimator".to_string(), "family".to_string()];
    for m in metrics {
        header.push(format!("default_{m}"));
        header.push(format!("oracle_{m}"));
    }
    let mut rows = vec![header];
    for p in points {
        let mut row = vec![p.estimator.clone(), p.family.clone()];
        for m in metrics {
            let d = p
                .default_scores
                .iter()
                .find(|(name, _)| name == m)
                .map_or("NA".to_string(), |(_, c)| c.format());
            let o = p
                .oracle_scores
                .iter()
                .find(|(name, _)| name == m)
                .map_or("NA".to_string(), |(_, c)| c.format());
            row.push(d);
            row.push(o);
        }
        rows.push(row);
    }
    csv_from_rows(rows)
}
