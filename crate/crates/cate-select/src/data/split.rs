//! Train/test/fold index plans, built once and persisted before any
//! learning so every candidate sees exactly the same splits.

use super::{DataSource, Dataset};
use crate::error::{Error, Result};
use crate::numeric::{seeded_rng, splitmix64};
use rand::seq::SliceRandom;
use std::fmt::Write as _;
use std::path::Path;

/// One cross-validation fold inside a training set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fit_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
}

/// Train/test split of one dataset iteration plus its fold structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationSplit {
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub folds: Vec<FoldSplit>,
}

/// Stored split plan: the Stage-1 artifact every later stage replays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub iterations: Vec<IterationSplit>,
    pub seed: u64,
    pub n_folds: usize,
}

fn round_half_up(v: f64) -> usize {
    (v + 0.5).floor() as usize
}

/// Stratified train/test split then round-robin fold assignment per arm.
/// Each arm is shuffled independently and dealt into folds, so per-fold
/// treated counts differ pairwise by at most one.
fn split_one_iteration(
    ds: &Dataset,
    test_fraction: f64,
    n_folds: usize,
    iter_seed: u64,
) -> Result<IterationSplit> {
    let mut rng = seeded_rng(iter_seed, "iteration-split");
    let mut treated = ds.treated_indices();
    let mut control = ds.control_indices();
    treated.shuffle(&mut rng);
    control.shuffle(&mut rng);

    let mut test_idx = Vec::new();
    let mut train_treated = Vec::new();
    let mut train_control = Vec::new();
    for (arm, train_arm) in [(&treated, &mut train_treated), (&control, &mut train_control)] {
        let n_test = round_half_up(arm.len() as f64 * test_fraction).min(arm.len());
        test_idx.extend_from_slice(&arm[..n_test]);
        train_arm.extend_from_slice(&arm[n_test..]);
    }

    for (name, arm) in [("treated", &train_treated), ("control", &train_control)] {
        if arm.len() < n_folds {
            return Err(Error::invalid(format!(
                "{name} arm has only {} training units, cannot stratify into {n_folds} folds",
                arm.len()
            )));
        }
    }

    // Deal each arm round-robin into fold validation sets.
    let mut val_sets: Vec<Vec<usize>> = vec![Vec::new(); n_folds];
    for arm in [&train_treated, &train_control] {
        for (pos, &idx) in arm.iter().enumerate() {
            val_sets[pos % n_folds].push(idx);
        }
    }

    let mut train_idx: Vec<usize> = train_treated;
    train_idx.extend(train_control);
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let folds = val_sets
        .into_iter()
        .map(|mut val| {
            val.sort_unstable();
            let fit: Vec<usize> =
                train_idx.iter().copied().filter(|i| !val.contains(i)).collect();
            FoldSplit { fit_idx: fit, val_idx: val }
        })
        .collect();

    Ok(IterationSplit { train_idx, test_idx, folds })
}

/// Builds a deterministic [`SplitPlan`] over a data source. With a single
/// dataset, iterations are independent seeded reshuffles; with per-iteration
/// files, each file gets one split.
pub fn build_split_plan(
    source: &DataSource,
    n_iterations: usize,
    test_fraction: f64,
    n_folds: usize,
    seed: u64,
) -> Result<SplitPlan> {
    if !(0.0..1.0).contains(&test_fraction) || test_fraction <= 0.0 {
        return Err(Error::invalid(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    if n_folds < 2 {
        return Err(Error::invalid("n_folds must be at least 2"));
    }
    if n_iterations == 0 {
        return Err(Error::invalid("need at least one iteration"));
    }
    if let DataSource::PerIteration(sets) = source {
        if sets.len() != n_iterations {
            return Err(Error::invalid(format!(
                "manifest provides {} datasets but {n_iterations} iterations were requested",
                sets.len()
            )));
        }
    }

    let mut iterations = Vec::with_capacity(n_iterations);
    for i in 0..n_iterations {
        let ds = source.dataset(i);
        let iter_seed = splitmix64(seed ^ (i as u64).wrapping_mul(0x9e3779b97f4a7c15));
        iterations.push(split_one_iteration(ds, test_fraction, n_folds, iter_seed)?);
    }
    Ok(SplitPlan { iterations, seed, n_folds })
}

impl SplitPlan {
    /// Canonical text serialization. Deterministic byte-for-byte: parsing a
    /// serialized plan and re-serializing it reproduces the exact bytes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "splitplan v1").unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "n_folds {}", self.n_folds).unwrap();
        writeln!(out, "iterations {}", self.iterations.len()).unwrap();
        for (i, it) in self.iterations.iter().enumerate() {
            writeln!(out, "iteration {i}").unwrap();
            writeln!(out, "train {}", join_indices(&it.train_idx)).unwrap();
            writeln!(out, "test {}", join_indices(&it.test_idx)).unwrap();
            for (f, fold) in it.folds.iter().enumerate() {
                writeln!(out, "fold {f}").unwrap();
                writeln!(out, "fit {}", join_indices(&fold.fit_idx)).unwrap();
                writeln!(out, "val {}", join_indices(&fold.val_idx)).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SplitPlan> {
        let mut lines = text.lines();
        let bad = |msg: &str| Error::invalid(format!("malformed split plan: {msg}"));

        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        if header != "splitplan v1" {
            return Err(bad(&format!("unknown header '{header}'")));
        }
        let seed = parse_kv(lines.next(), "seed")?;
        let n_folds = parse_kv(lines.next(), "n_folds")? as usize;
        let n_iter = parse_kv(lines.next(), "iterations")? as usize;

        let mut iterations = Vec::with_capacity(n_iter);
        for i in 0..n_iter {
            expect_line(lines.next(), &format!("iteration {i}"))?;
            let train_idx = parse_indices(lines.next(), "train")?;
            let test_idx = parse_indices(lines.next(), "test")?;
            let mut folds = Vec::with_capacity(n_folds);
            for f in 0..n_folds {
                expect_line(lines.next(), &format!("fold {f}"))?;
                let fit_idx = parse_indices(lines.next(), "fit")?;
                let val_idx = parse_indices(lines.next(), "val")?;
                folds.push(FoldSplit { fit_idx, val_idx });
            }
            iterations.push(IterationSplit { train_idx, test_idx, folds });
        }
        let plan = SplitPlan { iterations, seed, n_folds };
        plan.validate()?;
        Ok(plan)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        std::fs::write(p, self.to_text()).map_err(|e| Error::io(p.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SplitPlan> {
        let p = path.as_ref();
        let text =
            std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?;
        SplitPlan::from_text(&text)
    }

    /// Checks the structural invariants: disjoint train/test, folds that
    /// partition the training set, and fit/val complementarity.
    pub fn validate(&self) -> Result<()> {
        for (i, it) in self.iterations.iter().enumerate() {
            let train: std::collections::BTreeSet<usize> = it.train_idx.iter().copied().collect();
            let test: std::collections::BTreeSet<usize> = it.test_idx.iter().copied().collect();
            if !train.is_disjoint(&test) {
                return Err(Error::invalid(format!("iteration {i}: train and test overlap")));
            }
            if it.folds.len() != self.n_folds {
                return Err(Error::invalid(format!(
                    "iteration {i}: expected {} folds, found {}",
                    self.n_folds,
                    it.folds.len()
                )));
            }
            let mut covered = std::collections::BTreeSet::new();
            for (f, fold) in it.folds.iter().enumerate() {
                let fit: std::collections::BTreeSet<usize> = fold.fit_idx.iter().copied().collect();
                let val: std::collections::BTreeSet<usize> = fold.val_idx.iter().copied().collect();
                if !fit.is_disjoint(&val) {
                    return Err(Error::invalid(format!("iteration {i} fold {f}: fit/val overlap")));
                }
                let union: std::collections::BTreeSet<usize> = fit.union(&val).copied().collect();
                if union != train {
                    return Err(Error::invalid(format!(
                        "iteration {i} fold {f}: fit ∪ val does not equal train"
                    )));
                }
                for v in val {
                    if !covered.insert(v) {
                        return Err(Error::invalid(format!(
                            "iteration {i}: unit {v} appears in more than one fold val set"
                        )));
                    }
                }
            }
            if covered != train {
                return Err(Error::invalid(format!(
                    "iteration {i}: fold val sets do not partition train"
                )));
            }
        }
        Ok(())
    }
}

fn join_indices(v: &[usize]) -> String {
    let mut s = String::with_capacity(v.len() * 4);
    for (k, i) in v.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{i}").unwrap();
    }
    s
}

fn parse_kv(line: Option<&str>, key: &str) -> Result<u64> {
    let line = line.ok_or_else(|| Error::invalid(format!("split plan truncated before '{key}'")))?;
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| Error::invalid(format!("expected '{key} <value>', got '{line}'")))?;
    rest.trim().parse::<u64>().map_err(|_| Error::invalid(format!("bad value in '{line}'")))
}

fn expect_line(line: Option<&str>, want: &str) -> Result<()> {
    match line {
        Some(l) if l == want => Ok(()),
        Some(l) => Err(Error::invalid(format!("expected '{want}', got '{l}'"))),
        None => Err(Error::invalid(format!("split plan truncated before '{want}'"))),
    }
}

fn parse_indices(line: Option<&str>, key: &str) -> Result<Vec<usize>> {
    let line = line.ok_or_else(|| Error::invalid(format!("split plan truncated before '{key}'")))?;
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| Error::invalid(format!("expected '{key} ...', got '{line}'")))?;
    rest.split_whitespace()
        .map(|tok| tok.parse::<usize>().map_err(|_| Error::invalid(format!("bad index '{tok}'"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_partially_linear;
    use ndarray::Array2;

    fn toy_dataset(n: usize, n_treated: usize) -> Dataset {
        let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64 * 0.1);
        let t: Vec<u8> = (0..n).map(|i| u8::from(i < n_treated)).collect();
        let yf: Vec<f64> = (0..n).map(|i| i as f64).collect();
        Dataset::new(x, t, yf, None, None, None, None, super::super::OutcomeKind::Continuous)
            .unwrap()
    }

    #[test]
    fn exact_divisibility_balances_folds_exactly() {
        // 100 training units (30 treated), 10 folds: every val set gets
        // exactly 3 treated and 10 total. A vanishing test fraction rounds
        // to zero test units per arm, keeping all 100 in train.
        let ds = toy_dataset(100, 30);
        let source = DataSource::Single(ds);
        let plan = build_split_plan(&source, 1, 0.001, 10, 1).unwrap();
        let it = &plan.iterations[0];
        assert_eq!(it.train_idx.len(), 100);
        for fold in &it.folds {
            assert_eq!(fold.val_idx.len(), 10);
            let treated = fold.val_idx.iter().filter(|&&i| i < 30).count();
            assert_eq!(treated, 3);
        }
    }

    #[test]
    fn ihdp_sized_test_split() {
        // 747 rows, 139 treated: 10% test split lands on 74 or 75 rows.
        let ds = toy_dataset(747, 139);
        let plan = build_split_plan(&DataSource::Single(ds), 3, 0.1, 10, 7).unwrap();
        for it in &plan.iterations {
            let n_test = it.test_idx.len();
            assert!(n_test == 74 || n_test == 75, "test size {n_test}");
            assert_eq!(it.train_idx.len() + n_test, 747);
        }
    }

    #[test]
    fn same_seed_serializes_identically() {
        let ds = gen_partially_linear(120, 3, 1.0, 0.5, 1.0, 4).unwrap();
        let source = DataSource::Single(ds);
        let a = build_split_plan(&source, 4, 0.2, 5, 99).unwrap();
        let b = build_split_plan(&source, 4, 0.2, 5, 99).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let ds = gen_partially_linear(90, 2, 1.0, 0.0, 1.0, 8).unwrap();
        let plan = build_split_plan(&DataSource::Single(ds), 2, 0.25, 3, 5).unwrap();
        let text = plan.to_text();
        let reparsed = SplitPlan::from_text(&text).unwrap();
        assert_eq!(reparsed.to_text(), text);
        assert_eq!(reparsed, plan);
    }

    #[test]
    fn invariants_hold_on_generated_plans() {
        let ds = gen_partially_linear(200, 3, 1.0, 0.8, 1.0, 2).unwrap();
        let t: Vec<u8> = ds.t().to_vec();
        let plan = build_split_plan(&DataSource::Single(ds), 5, 0.1, 5, 3).unwrap();
        plan.validate().unwrap();
        // stratification: per-fold treated counts differ pairwise by <= 1
        for it in &plan.iterations {
            let counts: Vec<usize> = it
                .folds
                .iter()
                .map(|f| f.val_idx.iter().filter(|&&i| t[i] == 1).count())
                .collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "unbalanced treated counts {counts:?}");
        }
    }

    #[test]
    fn rejects_tiny_arms() {
        let ds = toy_dataset(20, 3);
        let err = build_split_plan(&DataSource::Single(ds), 1, 0.1, 5, 1).unwrap_err();
        assert!(err.to_string().contains("cannot stratify"), "{err}");
    }
}
