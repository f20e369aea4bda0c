//! Stratified K-fold machinery for internal cross-fitting. Out-of-fold
//! predictions are merged through [`OutOfFold`], which verifies that every
//! unit is covered exactly once — the coverage contract every consumer
//! (DR, DML, plugin truth, R-score nuisances) relies on.

use crate::error::{Error, Result};
use crate::numeric::seeded_rng;
use rand::seq::SliceRandom;

/// Partitions `0..t.len()` into `k` validation folds stratified on the
/// binary `t`: each arm is shuffled and dealt round-robin, so per-fold arm
/// counts differ by at most one. Errors when an arm has fewer than `k`
/// units.
pub fn stratified_folds(t: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid("cross-fitting needs at least 2 folds"));
    }
    let mut treated: Vec<usize> = (0..t.len()).filter(|&i| t[i] == 1).collect();
    let mut control: Vec<usize> = (0..t.len()).filter(|&i| t[i] == 0).collect();
    for (name, arm) in [("treated", &treated), ("control", &control)] {
        if arm.len() < k {
            return Err(Error::invalid(format!(
                "{name} arm has {} units, fewer than {k} cross-fit folds",
                arm.len()
            )));
        }
    }
    let mut rng = seeded_rng(seed, "stratified-folds");
    treated.shuffle(&mut rng);
    control.shuffle(&mut rng);

    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for arm in [&treated, &control] {
        for (pos, &idx) in arm.iter().enumerate() {
            folds[pos % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Complement of a fold within `0..n`.
pub fn fold_complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut in_fold = vec![false; n];
    for &i in fold {
        in_fold[i] = true;
    }
    (0..n).filter(|&i| !in_fold[i]).collect()
}

/// Collects out-of-fold predictions and enforces exactly-once coverage.
#[derive(Debug)]
pub struct OutOfFold {
    values: Vec<Option<f64>>,
    label: String,
}

impl OutOfFold {
    pub fn new(n: usize, label: impl Into<String>) -> Self {
        OutOfFold { values: vec![None; n], label: label.into() }
    }

    pub fn set(&mut self, index: usize, value: f64) -> Result<()> {
        let slot = self.values.get_mut(index).ok_or_else(|| {
            Error::invalid(format!("out-of-fold index {index} out of range"))
        })?;
        if slot.is_some() {
            return Err(Error::invalid(format!(
                "cross-fit coverage violation: unit {index} received a second out-of-fold {} prediction",
                self.label
            )));
        }
        *slot = Some(value);
        Ok(())
    }

    pub fn set_fold(&mut self, fold: &[usize], values: &[f64]) -> Result<()> {
        if fold.len() != values.len() {
            return Err(Error::invalid("fold/prediction length mismatch"));
        }
        for (&i, &v) in fold.iter().zip(values) {
            self.set(i, v)?;
        }
        Ok(())
    }

    /// Finalizes the merged vector, failing if any unit was never covered.
    pub fn into_vec(self) -> Result<Vec<f64>> {
        let label = self.label;
        self.values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::invalid(format!(
                        "cross-fit coverage violation: unit {i} has no out-of-fold {label} prediction"
                    ))
                })
            })
            .collect()
    }
}
