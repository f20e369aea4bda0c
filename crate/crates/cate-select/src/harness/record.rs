//! Metric records: the atomic results of Stage 2, persisted as
//! `records.csv` and consumed by aggregation.

use crate::error::{Error, Result};
use crate::metrics::MetricOutcome;
use std::path::Path;

/// One metric evaluation, keyed by candidate, iteration and (for
/// validation metrics) fold. The key tuple is unique within a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    /// `estimator/family/hyper_id`.
    pub candidate: String,
    pub iter: usize,
    /// `Some` for validation metrics, `None` for test metrics.
    pub fold: Option<usize>,
    pub metric: String,
    pub value: MetricOutcome,
}

impl MetricRecord {
    pub fn sort_key(&self) -> (String, usize, String, i64) {
        (
            self.candidate.clone(),
            self.iter,
            self.metric.clone(),
            self.fold.map_or(-1, |f| f as i64),
        )
    }

    /// Splits the candidate id into (estimator, family, hyper_id).
    pub fn candidate_parts(&self) -> Result<(String, String, String)> {
        split_candidate_id(&self.candidate)
    }
}

pub fn split_candidate_id(id: &str) -> Result<(String, String, String)> {
    let mut parts = id.splitn(3, '/');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(e), Some(f), Some(h)) if !e.is_empty() && !f.is_empty() => {
            Ok((e.to_string(), f.to_string(), h.to_string()))
        }
        _ => Err(Error::invalid(format!("malformed candidate id '{id}'"))),
    }
}

pub fn sort_records(records: &mut [MetricRecord]) {
    records.sort_by_key(|a| a.sort_key());
}

/// Serializes records to CSV bytes (sorted input expected). Values use the
/// shortest round-trip float form so the bytes are reproducible.
pub fn records_to_csv(records: &[MetricRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["candidate", "iter", "fold", "metric", "value", "note"])
        .map_err(|e| Error::invalid(format!("csv write: {e}")))?;
    for r in records {
        let fold = r.fold.map_or(String::new(), |f| f.to_string());
        let (value, note) = match &r.value {
            MetricOutcome::Value(v) => (format!("{v}"), String::new()),
            MetricOutcome::Unavailable(reason) => (String::new(), reason.clone()),
        };
        w.write_record([&r.candidate, &r.iter.to_string(), &fold, &r.metric, &value, &note])
            .map_err(|e| Error::invalid(format!("csv write: {e}")))?;
    }
    w.into_inner().map_err(|e| Error::invalid(format!("csv flush: {e}")))
}

pub fn write_records_csv(records: &[MetricRecord], path: impl AsRef<Path>) -> Result<()> {
    let p = path.as_ref();
    let bytes = records_to_csv(records)?;
    std::fs::write(p, bytes).map_err(|e| Error::io(p.display().to_string(), e))
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    let p = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(p)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", p.display())))?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid(format!("{} row {}: {e}", p.display(), i + 1)))?;
        if rec.len() != 6 {
            return Err(Error::invalid(format!(
                "{} row {}: expected 6 fields, found {}",
                p.display(),
                i + 1,
                rec.len()
            )));
        }
        let candidate = rec[0].to_string();
        split_candidate_id(&candidate)?;
        let iter: usize = rec[1]
            .parse()
            .map_err(|_| Error::invalid(format!("{} row {}: bad iter", p.display(), i + 1)))?;
        let fold = if rec[2].is_empty() {
            None
        } else {
            Some(rec[2].parse::<usize>().map_err(|_| {
                Error::invalid(format!("{} row {}: bad fold", p.display(), i + 1))
            })?)
        };
        let metric = rec[3].to_string();
        let value = if rec[4].is_empty() {
            MetricOutcome::Unavailable(rec[5].to_string())
        } else {
            MetricOutcome::Value(rec[4].parse::<f64>().map_err(|_| {
                Error::invalid(format!("{} row {}: bad value", p.display(), i + 1))
            })?)
        };
        out.push(MetricRecord { candidate, iter, fold, metric, value });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<MetricRecord> {
        vec![
            MetricRecord {
                candidate: "SL/tree/max_depth=5,min_samples_leaf=1".into(),
                iter: 0,
                fold: Some(1),
                metric: "mu_risk".into(),
                value: MetricOutcome::Value(0.25),
            },
            MetricRecord {
                candidate: "SL/tree/max_depth=5,min_samples_leaf=1".into(),
                iter: 0,
                fold: None,
                metric: "pehe".into(),
                value: MetricOutcome::Unavailable("no ground-truth effects".into()),
            },
        ]
    }

    #[test]
    fn round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("records.csv");
        let mut records = sample();
        sort_records(&mut records);
        write_records_csv(&records, &p).unwrap();
        let back = read_records_csv(&p).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn candidate_id_splits() {
        let (e, f, h) = split_candidate_id("DR/gbt_light/max_depth=5,reg_lambda=1").unwrap();
        assert_eq!(e, "DR");
        assert_eq!(f, "gbt_light");
        assert_eq!(h, "max_depth=5,reg_lambda=1");
        assert!(split_candidate_id("nonsense").is_err());
    }
}
