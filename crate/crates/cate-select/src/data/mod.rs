//! Dataset representation, benchmark-file ingestion, synthetic generators,
//! and split-plan construction.

mod csv_io;
mod dgp;
mod manifest;
mod split;

pub use csv_io::{load_csv_dataset, CsvSchema};
pub use dgp::{gen_partially_linear, gen_sinusoidal_demo, gen_sinusoidal_with, SinusoidalConfig};
pub use manifest::{load_manifest, DataSource};
pub use split::{build_split_plan, FoldSplit, IterationSplit, SplitPlan};

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};

/// Whether the factual outcome is a continuous measurement or a {0,1} label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Continuous,
    Binary,
}

/// One observational sample: covariates, binary treatment, factual outcome,
/// and whatever ground-truth columns the source provides.
///
/// `mu0`/`mu1` are noiseless potential-outcome means (IHDP-style benchmarks
/// ship them); `ycf` is the counterfactual outcome (Twins-style); `exp_flag`
/// marks membership in an experimental subsample (Jobs-style, required only
/// by the ATT error metric).
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    t: Vec<u8>,
    yf: Vec<f64>,
    ycf: Option<Vec<f64>>,
    mu0: Option<Vec<f64>>,
    mu1: Option<Vec<f64>>,
    exp_flag: Option<Vec<u8>>,
    outcome_kind: OutcomeKind,
}

impl Dataset {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x: Array2<f64>,
        t: Vec<u8>,
        yf: Vec<f64>,
        ycf: Option<Vec<f64>>,
        mu0: Option<Vec<f64>>,
        mu1: Option<Vec<f64>>,
        exp_flag: Option<Vec<u8>>,
        outcome_kind: OutcomeKind,
    ) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::invalid("dataset has no rows"));
        }
        if t.len() != n || yf.len() != n {
            return Err(Error::invalid(format!(
                "column length mismatch: x has {n} rows, t has {}, yf has {}",
                t.len(),
                yf.len()
            )));
        }
        for v in [&ycf, &mu0, &mu1].into_iter().flatten() {
            if v.len() != n {
                return Err(Error::invalid("optional outcome column length mismatch"));
            }
        }
        if let Some(e) = &exp_flag {
            if e.len() != n {
                return Err(Error::invalid("exp_flag length mismatch"));
            }
            if e.iter().any(|&v| v > 1) {
                return Err(Error::invalid("exp_flag must be binary"));
            }
        }
        if t.iter().any(|&v| v > 1) {
            return Err(Error::invalid("treatment must be binary"));
        }
        let n1 = t.iter().filter(|&&v| v == 1).count();
        if n1 == 0 || n1 == n {
            return Err(Error::invalid("both treatment arms must be nonempty"));
        }
        if mu0.is_some() != mu1.is_some() {
            return Err(Error::invalid("mu0 and mu1 must be present together"));
        }
        Ok(Dataset { x, t, yf, ycf, mu0, mu1, exp_flag, outcome_kind })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn t(&self) -> &[u8] {
        &self.t
    }

    pub fn yf(&self) -> &[f64] {
        &self.yf
    }

    pub fn ycf(&self) -> Option<&[f64]> {
        self.ycf.as_deref()
    }

    pub fn mu0(&self) -> Option<&[f64]> {
        self.mu0.as_deref()
    }

    pub fn mu1(&self) -> Option<&[f64]> {
        self.mu1.as_deref()
    }

    pub fn exp_flag(&self) -> Option<&[u8]> {
        self.exp_flag.as_deref()
    }

    pub fn outcome_kind(&self) -> OutcomeKind {
        self.outcome_kind
    }

    pub fn treated_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.t[i] == 1).collect()
    }

    pub fn control_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.t[i] == 0).collect()
    }

    /// True per-unit effect when the source provides one: `mu1 − mu0` when
    /// the noiseless means are present, otherwise the factual/counterfactual
    /// reconstruction (treated: `yf − ycf`; control: `ycf − yf`).
    pub fn tau_true(&self) -> Option<Vec<f64>> {
        if let (Some(m0), Some(m1)) = (&self.mu0, &self.mu1) {
            return Some(m1.iter().zip(m0).map(|(a, b)| a - b).collect());
        }
        let ycf = self.ycf.as_ref()?;
        Some(
            (0..self.n())
                .map(|i| {
                    if self.t[i] == 1 {
                        self.yf[i] - ycf[i]
                    } else {
                        ycf[i] - self.yf[i]
                    }
                })
                .collect(),
        )
    }

    /// Row-subset view materialized as borrowed columns. The subset need not
    /// contain both arms; metric code decides what it requires.
    pub fn view(&self, idx: &[usize]) -> DataView {
        let d = self.dim();
        let mut x = Array2::<f64>::zeros((idx.len(), d));
        for (r, &i) in idx.iter().enumerate() {
            x.row_mut(r).assign(&self.x.row(i));
        }
        DataView {
            x,
            t: idx.iter().map(|&i| self.t[i]).collect(),
            yf: idx.iter().map(|&i| self.yf[i]).collect(),
            ycf: self.ycf.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            mu0: self.mu0.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            mu1: self.mu1.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            exp_flag: self.exp_flag.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            outcome_kind: self.outcome_kind,
        }
    }

    pub fn full_view(&self) -> DataView {
        let idx: Vec<usize> = (0..self.n()).collect();
        self.view(&idx)
    }
}

/// Owned row subset of a [`Dataset`]. Unlike `Dataset` it does not insist on
/// both arms being present, since fold slices and metric edge cases may be
/// single-arm.
#[derive(Debug, Clone)]
pub struct DataView {
    pub x: Array2<f64>,
    pub t: Vec<u8>,
    pub yf: Vec<f64>,
    pub ycf: Option<Vec<f64>>,
    pub mu0: Option<Vec<f64>>,
    pub mu1: Option<Vec<f64>>,
    pub exp_flag: Option<Vec<u8>>,
    pub outcome_kind: OutcomeKind,
}

impl DataView {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Row subset of this view.
    pub fn subset(&self, idx: &[usize]) -> DataView {
        let d = self.dim();
        let mut x = Array2::<f64>::zeros((idx.len(), d));
        for (r, &i) in idx.iter().enumerate() {
            x.row_mut(r).assign(&self.x.row(i));
        }
        DataView {
            x,
            t: idx.iter().map(|&i| self.t[i]).collect(),
            yf: idx.iter().map(|&i| self.yf[i]).collect(),
            ycf: self.ycf.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            mu0: self.mu0.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            mu1: self.mu1.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            exp_flag: self.exp_flag.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect()),
            outcome_kind: self.outcome_kind,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn treated_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.t[i] == 1).collect()
    }

    pub fn control_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.t[i] == 0).collect()
    }

    pub fn tau_true(&self) -> Option<Vec<f64>> {
        if let (Some(m0), Some(m1)) = (&self.mu0, &self.mu1) {
            return Some(m1.iter().zip(m0).map(|(a, b)| a - b).collect());
        }
        let ycf = self.ycf.as_ref()?;
        Some(
            (0..self.n())
                .map(|i| {
                    if self.t[i] == 1 {
                        self.yf[i] - ycf[i]
                    } else {
                        ycf[i] - self.yf[i]
                    }
                })
                .collect(),
        )
    }

    pub fn t_f64(&self) -> Array1<f64> {
        Array1::from_iter(self.t.iter().map(|&v| v as f64))
    }
}
