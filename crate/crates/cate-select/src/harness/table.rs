//! Stage-3 post-processing: fold-average the validation records and merge
//! them with test records into one row per (candidate, iteration).

use super::record::{split_candidate_id, MetricRecord};
use crate::error::{Error, Result};
use crate::metrics::MetricOutcome;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Prefix distinguishing test-metric columns from validation columns in
/// the merged table (policy risk exists on both sides).
pub const TEST_PREFIX: &str = "test_";

#[derive(Debug, Clone)]
pub struct ResultsRow {
    pub candidate: String,
    pub estimator: String,
    pub family: String,
    pub hyper: String,
    pub iter: usize,
    /// Validation metrics under their own names, test metrics under
    /// `test_<name>`.
    pub cells: BTreeMap<String, MetricOutcome>,
}

#[derive(Debug, Clone)]
pub struct ResultsTable {
    pub rows: Vec<ResultsRow>,
    pub val_metrics: Vec<String>,
    /// Plain names (without the `test_` prefix).
    pub test_metrics: Vec<String>,
    pub n_folds: usize,
}

impl ResultsTable {
    pub fn test_column(name: &str) -> String {
        format!("{TEST_PREFIX}{name}")
    }

    pub fn iterations(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.rows.iter().map(|r| r.iter).collect();
        set.into_iter().collect()
    }

    pub fn candidates(&self) -> Vec<String> {
        let set: BTreeSet<String> = self.rows.iter().map(|r| r.candidate.clone()).collect();
        set.into_iter().collect()
    }

    pub fn row(&self, candidate: &str, iter: usize) -> Option<&ResultsRow> {
        self.rows.iter().find(|r| r.candidate == candidate && r.iter == iter)
    }

    /// Test metrics that have at least one available cell.
    pub fn usable_test_metrics(&self) -> Vec<String> {
        self.test_metrics
            .iter()
            .filter(|m| {
                let col = Self::test_column(m);
                self.rows.iter().any(|r| matches!(r.cells.get(&col), Some(MetricOutcome::Value(_))))
            })
            .cloned()
            .collect()
    }

    /// Validation metrics that have at least one available cell.
    pub fn usable_val_metrics(&self) -> Vec<String> {
        self.val_metrics
            .iter()
            .filter(|m| {
                self.rows.iter().any(|r| matches!(r.cells.get(*m), Some(MetricOutcome::Value(_))))
            })
            .cloned()
            .collect()
    }
}

/// Fold-averages validation metrics and merges them with test metrics on
/// the (candidate, iteration) key. Requires a complete record set: every
/// validation metric of a (candidate, iteration) must cover exactly the
/// fold set seen in the run. Unavailable fold values propagate to the
/// aggregated cell; they are never imputed.
pub fn aggregate_and_merge(records: &[MetricRecord]) -> Result<ResultsTable> {
    if records.is_empty() {
        return Err(Error::invalid("no records to aggregate"));
    }

    let fold_set: BTreeSet<usize> = records.iter().filter_map(|r| r.fold).collect();
    let n_folds = fold_set.len();

    let mut val_metrics: BTreeSet<String> = BTreeSet::new();
    let mut test_metrics: BTreeSet<String> = BTreeSet::new();
    // (candidate, iter) -> metric -> fold -> outcome
    type FoldMap = BTreeMap<usize, MetricOutcome>;
    let mut val_map: BTreeMap<(String, usize), BTreeMap<String, FoldMap>> = BTreeMap::new();
    let mut test_map: BTreeMap<(String, usize), BTreeMap<String, MetricOutcome>> = BTreeMap::new();

    for r in records {
        let key = (r.candidate.clone(), r.iter);
        match r.fold {
            Some(f) => {
                val_metrics.insert(r.metric.clone());
                let slot = val_map
                    .entry(key)
                    .or_default()
                    .entry(r.metric.clone())
                    .or_default()
                    .insert(f, r.value.clone());
                if slot.is_some() {
                    return Err(Error::invalid(format!(
                        "duplicate record for {} iter {} fold {f} metric {}",
                        r.candidate, r.iter, r.metric
                    )));
                }
            }
            None => {
                test_metrics.insert(r.metric.clone());
                let slot = test_map
                    .entry(key)
                    .or_default()
                    .insert(r.metric.clone(), r.value.clone());
                if slot.is_some() {
                    return Err(Error::invalid(format!(
                        "duplicate test record for {} iter {} metric {}",
                        r.candidate, r.iter, r.metric
                    )));
                }
            }
        }
    }

    let keys: BTreeSet<(String, usize)> =
        val_map.keys().chain(test_map.keys()).cloned().collect();

    let mut rows = Vec::with_capacity(keys.len());
    for (candidate, iter) in keys {
        let (estimator, family, hyper) = split_candidate_id(&candidate)?;
        let mut cells = BTreeMap::new();

        if let Some(metrics) = val_map.get(&(candidate.clone(), iter)) {
            for metric in &val_metrics {
                let folds = metrics.get(metric).ok_or_else(|| {
                    Error::invalid(format!(
                        "candidate {candidate} iter {iter}: metric {metric} missing entirely"
                    ))
                })?;
                // exact fold coverage
                for f in &fold_set {
                    if !folds.contains_key(f) {
                        return Err(Error::invalid(format!(
                            "candidate {candidate} iter {iter} metric {metric}: fold {f} missing"
                        )));
                    }
                }
                let agg = aggregate_folds(folds);
                cells.insert(metric.clone(), agg);
            }
        } else if !val_metrics.is_empty() {
            return Err(Error::invalid(format!(
                "candidate {candidate} iter {iter}: no validation records"
            )));
        }

        if let Some(metrics) = test_map.get(&(candidate.clone(), iter)) {
            for metric in &test_metrics {
                let outcome = metrics.get(metric).ok_or_else(|| {
                    Error::invalid(format!(
                        "candidate {candidate} iter {iter}: test metric {metric} missing"
                    ))
                })?;
                cells.insert(ResultsTable::test_column(metric), outcome.clone());
            }
        } else if !test_metrics.is_empty() {
            return Err(Error::invalid(format!(
                "candidate {candidate} iter {iter}: no test records"
            )));
        }

        rows.push(ResultsRow { candidate, estimator, family, hyper, iter, cells });
    }

    rows.sort_by_key(|a| (a.candidate.clone(), a.iter));
    Ok(ResultsTable {
        rows,
        val_metrics: val_metrics.into_iter().collect(),
        test_metrics: test_metrics.into_iter().collect(),
        n_folds,
    })
}

fn aggregate_folds(folds: &BTreeMap<usize, MetricOutcome>) -> MetricOutcome {
    let mut sum = 0.0;
    for (f, v) in folds {
        match v {
            MetricOutcome::Value(x) => sum += x,
            MetricOutcome::Unavailable(reason) => {
                return MetricOutcome::Unavailable(format!("fold {f}: {reason}"));
            }
        }
    }
    MetricOutcome::Value(sum / folds.len() as f64)
}

/// Writes the merged table as `results.csv`: key columns then validation
/// columns then `test_*` columns, empty cells for unavailable values.
pub fn write_results_csv(table: &ResultsTable, path: impl AsRef<Path>) -> Result<()> {
    let p = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "candidate".to_string(),
        "estimator".to_string(),
        "family".to_string(),
        "hyper".to_string(),
        "iter".to_string(),
    ];
    header.extend(table.val_metrics.iter().cloned());
    header.extend(table.test_metrics.iter().map(|m| ResultsTable::test_column(m)));
    w.write_record(&header).map_err(|e| Error::invalid(format!("csv write: {e}")))?;

    for row in &table.rows {
        let mut rec = vec![
            row.candidate.clone(),
            row.estimator.clone(),
            row.family.clone(),
            row.hyper.clone(),
            row.iter.to_string(),
        ];
        for m in table
            .val_metrics
            .iter()
            .cloned()
            .chain(table.test_metrics.iter().map(|m| ResultsTable::test_column(m)))
        {
            let cell = match row.cells.get(&m) {
                Some(MetricOutcome::Value(v)) => format!("{v}"),
                _ => String::new(),
            };
            rec.push(cell);
        }
        w.write_record(&rec).map_err(|e| Error::invalid(format!("csv write: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv flush: {e}")))?;
    std::fs::write(p, bytes).map_err(|e| Error::io(p.display().to_string(), e))
}
