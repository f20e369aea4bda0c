//! Stage-4 analysis queries over the merged results table: per-iteration
//! winner selection, Oracle selection, Regret, rank correlation,
//! iteration summaries, defaults-versus-oracle points, and correlations
//! between ground-truth metrics.

use super::table::{ResultsTable, TEST_PREFIX};
use crate::error::{Error, Result};
use crate::learners::{default_spec, LearnerFamily};
use crate::metrics::{orientation, MetricOutcome, Orientation};
use crate::numeric::{mean, variance_sample};

/// Mean ± standard error over dataset iterations. The standard error uses
/// the sample standard deviation (n − 1) over √n and is unavailable for a
/// single iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCell {
    pub mean: f64,
    pub std_err: Option<f64>,
    pub n: usize,
}

impl SummaryCell {
    pub fn format(&self) -> String {
        match self.std_err {
            Some(se) => format!("{:.4}±{:.4}", self.mean, se),
            None => format!("{:.4}±NA", self.mean),
        }
    }
}

/// Summarizes per-iteration values. Errors on empty input; a single value
/// yields a mean with an unavailable standard error.
pub fn summarize(values: &[f64]) -> Result<SummaryCell> {
    if values.is_empty() {
        return Err(Error::invalid("cannot summarize zero values"));
    }
    let m = mean(values);
    let std_err = if values.len() >= 2 {
        Some((variance_sample(values).sqrt()) / (values.len() as f64).sqrt())
    } else {
        None
    };
    Ok(SummaryCell { mean: m, std_err, n: values.len() })
}

fn column_name(table: &ResultsTable, metric: &str) -> Result<String> {
    if table.val_metrics.iter().any(|m| m == metric) {
        return Ok(metric.to_string());
    }
    let test_col = ResultsTable::test_column(metric);
    if table.test_metrics.iter().any(|m| m == metric) {
        return Ok(test_col);
    }
    if metric.starts_with(TEST_PREFIX)
        && table.test_metrics.iter().any(|m| ResultsTable::test_column(m) == metric)
    {
        return Ok(metric.to_string());
    }
    Err(Error::invalid(format!("metric column '{metric}' not present in results")))
}

fn available_cells(table: &ResultsTable, column: &str, iter: usize) -> Vec<(String, f64)> {
    table
        .rows
        .iter()
        .filter(|r| r.iter == iter)
        .filter_map(|r| match r.cells.get(column) {
            Some(MetricOutcome::Value(v)) => Some((r.candidate.clone(), *v)),
            _ => None,
        })
        .collect()
}

fn pick(cells: &[(String, f64)], orient: Orientation) -> Option<(String, f64)> {
    let better = |a: f64, b: f64| match orient {
        Orientation::LowerIsBetter => a < b,
        Orientation::HigherIsBetter => a > b,
    };
    let mut best: Option<(String, f64)> = None;
    for (cand, v) in cells {
        match &best {
            None => best = Some((cand.clone(), *v)),
            Some((bc, bv)) => {
                // ties break toward the lexicographically smaller id
                if better(*v, *bv) || (*v == *bv && cand < bc) {
                    best = Some((cand.clone(), *v));
                }
            }
        }
    }
    best
}

/// Winner by a validation metric within one iteration: argmin, or argmax
/// for higher-is-better scores, skipping unavailable cells; ties break
/// lexicographically.
pub fn select_winner(table: &ResultsTable, val_metric: &str, iter: usize) -> Result<String> {
    let col = column_name(table, val_metric)?;
    let cells = available_cells(table, &col, iter);
    pick(&cells, orientation(val_metric))
        .map(|(c, _)| c)
        .ok_or_else(|| Error::invalid(format!("metric {val_metric}: no available cell in iteration {iter}")))
}

/// Oracle selection within one iteration: the candidate optimizing the
/// test metric itself. Returns the winning id and its test value.
pub fn oracle_select(table: &ResultsTable, test_metric: &str, iter: usize) -> Result<(String, f64)> {
    let col = column_name(table, &ResultsTable::test_column(test_metric))
        .or_else(|_| column_name(table, test_metric))?;
    let cells = available_cells(table, &col, iter);
    pick(&cells, orientation(test_metric)).ok_or_else(|| {
        Error::invalid(format!("test metric {test_metric}: no available cell in iteration {iter}"))
    })
}

fn test_value(table: &ResultsTable, candidate: &str, test_metric: &str, iter: usize) -> Result<f64> {
    let col = ResultsTable::test_column(test_metric);
    let row = table
        .row(candidate, iter)
        .ok_or_else(|| Error::invalid(format!("candidate {candidate} missing in iteration {iter}")))?;
    match row.cells.get(&col) {
        Some(MetricOutcome::Value(v)) => Ok(*v),
        Some(MetricOutcome::Unavailable(r)) => Err(Error::invalid(format!(
            "candidate {candidate} iter {iter}: test metric {test_metric} unavailable ({r})"
        ))),
        None => Err(Error::invalid(format!("test column {col} absent"))),
    }
}

/// Regret of selecting by `val_metric` when judged by `test_metric` in one
/// iteration: the absolute gap between the oracle's test score and the
/// picked candidate's test score.
pub fn regret(
    table: &ResultsTable,
    val_metric: &str,
    test_metric: &str,
    iter: usize,
) -> Result<f64> {
    let (_, oracle_value) = oracle_select(table, test_metric, iter)?;
    let picked = select_winner(table, val_metric, iter)?;
    let picked_value = test_value(table, &picked, test_metric, iter)?;
    Ok((oracle_value - picked_value).abs())
}

/// Spearman rank correlation with average-rank tie handling. `None` when
/// either side has zero rank variance.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    pearson(&ra, &rb)
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // average rank for the tie group, 1-based
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let ma = mean(a);
    let mb = mean(b);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

/// Spearman correlation between a validation column and a test column over
/// the candidates of one iteration, in raw orientation (higher-is-better
/// validation scores are expected to correlate negatively with losses).
/// Unavailable with fewer than 3 complete pairs or zero variance.
pub fn rank_correlation(
    table: &ResultsTable,
    val_metric: &str,
    test_metric: &str,
    iter: usize,
) -> Result<MetricOutcome> {
    let val_col = column_name(table, val_metric)?;
    let test_col = column_name(table, &ResultsTable::test_column(test_metric))
        .or_else(|_| column_name(table, test_metric))?;
    let mut pairs = Vec::new();
    for row in table.rows.iter().filter(|r| r.iter == iter) {
        if let (Some(MetricOutcome::Value(a)), Some(MetricOutcome::Value(b))) =
            (row.cells.get(&val_col), row.cells.get(&test_col))
        {
            pairs.push((*a, *b));
        }
    }
    if pairs.len() < 3 {
        return Ok(MetricOutcome::unavailable(format!(
            "only {} paired observations (need 3)",
            pairs.len()
        )));
    }
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    match spearman(&a, &b) {
        Some(rho) => Ok(MetricOutcome::Value(rho)),
        None => Ok(MetricOutcome::unavailable("zero variance in a ranking")),
    }
}

/// One defaults-versus-oracle comparison point pair for an (estimator,
/// family) cell: test scores of the default hyperparameter assignment next
/// to the oracle over hyperparameters only, both summarized over
/// iterations.
#[derive(Debug, Clone)]
pub struct DefaultsOraclePoint {
    pub estimator: String,
    pub family: String,
    pub default_scores: Vec<(String, SummaryCell)>,
    pub oracle_scores: Vec<(String, SummaryCell)>,
}

/// Restricting the search to hyperparameters of one (estimator, family)
/// cell, collects the default assignment's test scores and the per-metric
/// oracle scores across iterations.
pub fn defaults_vs_oracle(
    table: &ResultsTable,
    metrics: &[String],
) -> Result<Vec<DefaultsOraclePoint>> {
    let mut groups: std::collections::BTreeSet<(String, String)> = Default::default();
    for row in &table.rows {
        groups.insert((row.estimator.clone(), row.family.clone()));
    }
    let mut out = Vec::new();
    for (estimator, family) in groups {
        let fam = LearnerFamily::parse(&family)?;
        let default_hyper = default_spec(fam).hyper_id();
        let group_rows: Vec<&super::table::ResultsRow> = table
            .rows
            .iter()
            .filter(|r| r.estimator == estimator && r.family == family)
            .collect();
        if !group_rows.iter().any(|r| r.hyper == default_hyper) {
            return Err(Error::invalid(format!(
                "no default hyperparameter candidate in group {estimator}/{family}"
            )));
        }
        let iters: std::collections::BTreeSet<usize> = group_rows.iter().map(|r| r.iter).collect();

        let mut default_scores = Vec::new();
        let mut oracle_scores = Vec::new();
        for metric in metrics {
            let col = ResultsTable::test_column(metric);
            let mut defaults = Vec::new();
            let mut oracles = Vec::new();
            for &it in &iters {
                let cells: Vec<(String, f64)> = group_rows
                    .iter()
                    .filter(|r| r.iter == it)
                    .filter_map(|r| match r.cells.get(&col) {
                        Some(MetricOutcome::Value(v)) => Some((r.candidate.clone(), *v)),
                        _ => None,
                    })
                    .collect();
                if let Some((_, best)) = pick(&cells, orientation(metric)) {
                    oracles.push(best);
                }
                if let Some(v) = group_rows
                    .iter()
                    .find(|r| r.iter == it && r.hyper == default_hyper)
                    .and_then(|r| r.cells.get(&col))
                    .and_then(MetricOutcome::value)
                {
                    defaults.push(v);
                }
            }
            if defaults.is_empty() || oracles.is_empty() {
                continue;
            }
            default_scores.push((metric.clone(), summarize(&defaults)?));
            oracle_scores.push((metric.clone(), summarize(&oracles)?));
        }
        out.push(DefaultsOraclePoint { estimator, family, default_scores, oracle_scores });
    }
    Ok(out)
}

/// Scope of a candidate subset for ground-truth metric correlations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Estimator(String),
    Family(String),
    All,
}

impl Scope {
    pub fn label(&self) -> String {
        match self {
            Scope::Estimator(e) => e.clone(),
            Scope::Family(f) => f.clone(),
            Scope::All => "ALL".to_string(),
        }
    }
}

fn per_iteration_truth_correlations(
    table: &ResultsTable,
    scope: &Scope,
    metric_a: &str,
    metric_b: &str,
) -> Vec<f64> {
    let col_a = ResultsTable::test_column(metric_a);
    let col_b = ResultsTable::test_column(metric_b);
    let mut per_iter = Vec::new();
    for iter in table.iterations() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for row in table.rows.iter().filter(|r| r.iter == iter) {
            let in_scope = match scope {
                Scope::Estimator(e) => &row.estimator == e,
                Scope::Family(f) => &row.family == f,
                Scope::All => true,
            };
            if !in_scope {
                continue;
            }
            if let (Some(MetricOutcome::Value(x)), Some(MetricOutcome::Value(y))) =
                (row.cells.get(&col_a), row.cells.get(&col_b))
            {
                a.push(*x);
                b.push(*y);
            }
        }
        if a.len() < 3 {
            continue;
        }
        if let Some(rho) = spearman(&a, &b) {
            per_iter.push(rho);
        }
    }
    per_iter
}

/// Per-iteration Spearman between two test-metric columns over the scoped
/// candidates, summarized across iterations. Unavailable when no
/// iteration has 3+ complete pairs with variance.
pub fn truth_metric_correlation(
    table: &ResultsTable,
    scope: &Scope,
    metric_a: &str,
    metric_b: &str,
) -> Result<MetricOutcome> {
    match truth_metric_correlation_summary(table, scope, metric_a, metric_b)? {
        Some(cell) => Ok(MetricOutcome::Value(cell.mean)),
        None => Ok(MetricOutcome::unavailable(
            "no iteration had 3+ scoped candidates with variance in both columns",
        )),
    }
}

/// Like [`truth_metric_correlation`] but returning the full summary cell.
pub fn truth_metric_correlation_summary(
    table: &ResultsTable,
    scope: &Scope,
    metric_a: &str,
    metric_b: &str,
) -> Result<Option<SummaryCell>> {
    let per_iter = per_iteration_truth_correlations(table, scope, metric_a, metric_b);
    if per_iter.is_empty() {
        return Ok(None);
    }
    Ok(Some(summarize(&per_iter)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::record::MetricRecord;
    use crate::harness::table::aggregate_and_merge;
    use approx::assert_abs_diff_eq;

    type RawRecord<'a> = (&'a str, usize, Option<usize>, &'a str, Option<f64>);

    fn table_from(rows: Vec<RawRecord<'_>>) -> ResultsTable {
        let records: Vec<MetricRecord> = rows
            .into_iter()
            .map(|(c, iter, fold, metric, v)| MetricRecord {
                candidate: c.into(),
                iter,
                fold,
                metric: metric.into(),
                value: match v {
                    Some(x) => MetricOutcome::Value(x),
                    None => MetricOutcome::unavailable("n/a"),
                },
            })
            .collect();
        aggregate_and_merge(&records).unwrap()
    }

    #[test]
    fn winner_argmin_and_ties() {
        let table = table_from(vec![
            ("SL/tree/a", 0, Some(0), "mu_risk", Some(3.0)),
            ("TL/tree/a", 0, Some(0), "mu_risk", Some(1.0)),
            ("XL/tree/a", 0, Some(0), "mu_risk", Some(2.0)),
        ]);
        assert_eq!(select_winner(&table, "mu_risk", 0).unwrap(), "TL/tree/a");

        let tie = table_from(vec![
            ("SL/tree/a", 0, Some(0), "mu_risk", Some(1.0)),
            ("TL/tree/a", 0, Some(0), "mu_risk", Some(1.0)),
        ]);
        assert_eq!(select_winner(&tie, "mu_risk", 0).unwrap(), "SL/tree/a");
    }

    #[test]
    fn higher_is_better_metrics_argmax() {
        let table = table_from(vec![
            ("SL/tree/a", 0, Some(0), "mu_risk_r2", Some(0.2)),
            ("TL/tree/a", 0, Some(0), "mu_risk_r2", Some(0.9)),
        ]);
        assert_eq!(select_winner(&table, "mu_risk_r2", 0).unwrap(), "TL/tree/a");
    }

    #[test]
    fn winner_skips_unavailable_and_errors_on_empty() {
        let table = table_from(vec![
            ("SL/tree/a", 0, Some(0), "mu_risk", None),
            ("TL/tree/a", 0, Some(0), "mu_risk", Some(5.0)),
        ]);
        assert_eq!(select_winner(&table, "mu_risk", 0).unwrap(), "TL/tree/a");

        let empty = table_from(vec![
            ("SL/tree/a", 0, Some(0), "mu_risk", None),
            ("SL/tree/a", 0, None, "pehe", Some(1.0)),
        ]);
        assert!(select_winner(&empty, "mu_risk", 0).is_err());
    }

    #[test]
    fn oracle_picks_test_argmin_and_lower_bounds_everyone() {
        let table = table_from(vec![
            ("SL/tree/a", 0, None, "pehe", Some(3.0)),
            ("TL/tree/a", 0, None, "pehe", Some(1.0)),
            ("XL/tree/a", 0, None, "pehe", Some(2.0)),
        ]);
        let (winner, value) = oracle_select(&table, "pehe", 0).unwrap();
        assert_eq!(winner, "TL/tree/a");
        assert_eq!(value, 1.0);
        for cand in table.candidates() {
            let v = test_value(&table, &cand, "pehe", 0).unwrap();
            assert!(value <= v);
        }
    }

    #[test]
    fn widening_the_candidate_set_never_hurts_the_oracle() {
        let full = table_from(vec![
            ("SL/tree/a", 0, None, "pehe", Some(3.0)),
            ("TL/tree/a", 0, None, "pehe", Some(1.0)),
            ("XL/tree/a", 0, None, "pehe", Some(2.0)),
        ]);
        let mut narrow = full.clone();
        narrow.rows.retain(|r| r.candidate != "TL/tree/a");
        let wide_value = oracle_select(&full, "pehe", 0).unwrap().1;
        let narrow_value = oracle_select(&narrow, "pehe", 0).unwrap().1;
        assert!(wide_value <= narrow_value);
    }

    #[test]
    fn oracle_may_differ_across_test_metrics() {
        let table = table_from(vec![
            ("SL/tree/a", 0, None, "pehe", Some(1.0)),
            ("SL/tree/a", 0, None, "e_ate", Some(9.0)),
            ("TL/tree/a", 0, None, "pehe", Some(2.0)),
            ("TL/tree/a", 0, None, "e_ate", Some(0.5)),
        ]);
        assert_eq!(oracle_select(&table, "pehe", 0).unwrap().0, "SL/tree/a");
        assert_eq!(oracle_select(&table, "e_ate", 0).unwrap().0, "TL/tree/a");
    }

    #[test]
    fn regret_hand_case_and_self_selection() {
        let table = table_from(vec![
            ("SL/tree/a", 0, Some(0), "mu_risk", Some(0.1)),
            ("SL/tree/a", 0, None, "pehe", Some(3.0)),
            ("TL/tree/a", 0, Some(0), "mu_risk", Some(0.9)),
            ("TL/tree/a", 0, None, "pehe", Some(1.0)),
        ]);
        // μ-risk picks SL (test 3.0); oracle is TL (1.0): regret 2
        assert_abs_diff_eq!(regret(&table, "mu_risk", "pehe", 0).unwrap(), 2.0, epsilon = 1e-12);
        // selecting by the test metric itself has zero regret
        assert_eq!(regret(&table, "test_pehe", "pehe", 0).unwrap(), 0.0);
    }

    #[test]
    fn spearman_hand_cases() {
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        // ranks (1,2,3) vs (2,1,3): ρ = 0.5
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[20.0, 10.0, 30.0]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn rank_correlation_of_metric_with_itself_is_one() {
        let table = table_from(vec![
            ("SL/tree/a", 0, None, "pehe", Some(3.0)),
            ("TL/tree/a", 0, None, "pehe", Some(1.0)),
            ("XL/tree/a", 0, None, "pehe", Some(2.0)),
        ]);
        let rho = rank_correlation(&table, "test_pehe", "pehe", 0).unwrap();
        assert_eq!(rho.value().unwrap(), 1.0);
    }

    #[test]
    fn rank_correlation_needs_three_pairs() {
        let table = table_from(vec![
            ("SL/tree/a", 0, Some(0), "mu_risk", Some(0.1)),
            ("SL/tree/a", 0, None, "pehe", Some(3.0)),
            ("TL/tree/a", 0, Some(0), "mu_risk", Some(0.2)),
            ("TL/tree/a", 0, None, "pehe", Some(1.0)),
        ]);
        assert!(matches!(
            rank_correlation(&table, "mu_risk", "pehe", 0).unwrap(),
            MetricOutcome::Unavailable(_)
        ));
    }

    #[test]
    fn summarize_hand_cases() {
        let s = summarize(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.std_err, Some(0.0));

        // (0, 2): sd = √2, stderr = √2/√2 = 1
        let s = summarize(&[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(s.mean, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.std_err.unwrap(), 1.0, epsilon = 1e-12);

        // permutation invariance
        let a = summarize(&[3.0, 1.0, 2.0]).unwrap();
        let b = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a, b);

        let single = summarize(&[5.0]).unwrap();
        assert!(single.std_err.is_none());
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn truth_correlation_identical_columns() {
        let mut rows = Vec::new();
        for iter in 0..3 {
            for (c, v) in [("SL/tree/a", 1.0), ("TL/tree/a", 2.0), ("XL/tree/a", 3.0)] {
                rows.push((c, iter, None, "pehe", Some(v + iter as f64)));
                rows.push((c, iter, None, "e_ate", Some(v + iter as f64)));
            }
        }
        let table = table_from(rows);
        let cell =
            truth_metric_correlation_summary(&table, &Scope::All, "e_ate", "pehe").unwrap().unwrap();
        assert_eq!(cell.mean, 1.0);
        assert_eq!(cell.std_err, Some(0.0));

        // one column constant → unavailable
        let mut rows = Vec::new();
        for (c, v) in [("SL/tree/a", 1.0), ("TL/tree/a", 2.0), ("XL/tree/a", 3.0)] {
            rows.push((c, 0, None, "pehe", Some(v)));
            rows.push((c, 0, None, "e_ate", Some(7.0)));
        }
        let table = table_from(rows);
        assert!(matches!(
            truth_metric_correlation(&table, &Scope::All, "e_ate", "pehe").unwrap(),
            MetricOutcome::Unavailable(_)
        ));
    }

    #[test]
    fn defaults_vs_oracle_degenerate_grid() {
        // grid of size 1 (the default itself): A = B
        let hyper = default_spec(LearnerFamily::Tree).hyper_id();
        let cand = format!("SL/tree/{hyper}");
        let mut rows = Vec::new();
        for iter in 0..2 {
            rows.push((cand.as_str(), iter, None, "pehe", Some(1.5)));
        }
        let table = table_from(rows);
        let points = defaults_vs_oracle(&table, &["pehe".to_string()]).unwrap();
        assert_eq!(points.len(), 1);
        let p = &points[0];
        assert_eq!(p.default_scores[0].1.mean, p.oracle_scores[0].1.mean);
    }

    #[test]
    fn defaults_vs_oracle_oracle_dominates_default() {
        let default_hyper = default_spec(LearnerFamily::Tree).hyper_id();
        let default_cand = format!("SL/tree/{default_hyper}");
        let mut rows = Vec::new();
        for iter in 0..3 {
            rows.push((default_cand.as_str(), iter, None, "pehe", Some(2.0)));
            rows.push(("SL/tree/max_depth=5,min_samples_leaf=2", iter, None, "pehe", Some(1.0)));
        }
        let table = table_from(rows);
        let points = defaults_vs_oracle(&table, &["pehe".to_string()]).unwrap();
        let p = &points[0];
        assert!(p.oracle_scores[0].1.mean <= p.default_scores[0].1.mean);
    }
}
