//! Evaluation metrics. Ground-truth test metrics ([`truth`]) need effect or
//! experimental columns only benchmarks provide; validation metrics
//! ([`mu`], [`plugin`], [`matching`], [`rscore`], validation policy risk)
//! work from observed data alone and are what model selection actually
//! sees.

pub mod matching;
pub mod mu;
pub mod plugin;
pub mod rscore;
pub mod truth;

use crate::error::{Error, Result};
use crate::learners::LearnerFamily;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A metric evaluation either yields a number or is declared unavailable
/// with a reason. Unavailability is an expected outcome (capability absent,
/// degenerate data), not a failure, and must never be silently imputed.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricOutcome {
    Value(f64),
    Unavailable(String),
}

impl MetricOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricOutcome::Value(v) => Some(*v),
            MetricOutcome::Unavailable(_) => None,
        }
    }

    pub fn unavailable(reason: impl Into<String>) -> Self {
        MetricOutcome::Unavailable(reason.into())
    }
}

impl From<f64> for MetricOutcome {
    fn from(v: f64) -> Self {
        MetricOutcome::Value(v)
    }
}

/// Whether smaller or larger metric values mean better models. The
/// registry is explicit configuration: rank correlations are reported in
/// raw orientation, so consumers must know which metrics invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    LowerIsBetter,
    HigherIsBetter,
}

/// Orientation registry keyed by stable metric name. Only the R²-style
/// scores invert; everything else is a loss.
pub fn orientation(metric: &str) -> Orientation {
    if metric == names::MU_RISK_R2 || metric.starts_with("tau_rscore/") {
        Orientation::HigherIsBetter
    } else {
        Orientation::LowerIsBetter
    }
}

/// PEHE-style or ATE-style feedback from a pseudo-truth comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRiskFlavor {
    Pehe,
    Ate,
}

impl TauRiskFlavor {
    pub fn label(self) -> &'static str {
        match self {
            TauRiskFlavor::Pehe => "pehe",
            TauRiskFlavor::Ate => "ate",
        }
    }

    pub fn all() -> [TauRiskFlavor; 2] {
        [TauRiskFlavor::Pehe, TauRiskFlavor::Ate]
    }
}

/// The auxiliary learner menu shared by plugin truth and R-score
/// nuisances: decision tree, boosted trees, kernel ridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxLearner {
    Dt,
    Gbt,
    Kr,
}

impl AuxLearner {
    pub fn family(self) -> LearnerFamily {
        match self {
            AuxLearner::Dt => LearnerFamily::Tree,
            AuxLearner::Gbt => LearnerFamily::GbtLight,
            AuxLearner::Kr => LearnerFamily::KernelRidge,
        }
    }

    pub fn label_upper(self) -> &'static str {
        match self {
            AuxLearner::Dt => "DT",
            AuxLearner::Gbt => "GBT",
            AuxLearner::Kr => "KR",
        }
    }

    pub fn label_lower(self) -> &'static str {
        match self {
            AuxLearner::Dt => "dt",
            AuxLearner::Gbt => "gbt",
            AuxLearner::Kr => "kr",
        }
    }

    pub fn all() -> [AuxLearner; 3] {
        [AuxLearner::Dt, AuxLearner::Gbt, AuxLearner::Kr]
    }
}

impl fmt::Display for AuxLearner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label_lower())
    }
}

/// Stable metric-name strings used as record keys and table columns.
pub mod names {
    use super::{AuxLearner, TauRiskFlavor};

    pub const MU_RISK: &str = "mu_risk";
    pub const MU_RISK_R2: &str = "mu_risk_r2";
    pub const POLICY_RISK: &str = "policy_risk";

    pub const PEHE: &str = "pehe";
    pub const E_ATE: &str = "e_ate";
    pub const E_ATT: &str = "e_att";

    pub fn tau_plugin(flavor: TauRiskFlavor, estimator: &str, learner: AuxLearner) -> String {
        format!("tau_plugin_{}/{}-{}", flavor.label(), estimator, learner.label_upper())
    }

    pub fn tau_match(flavor: TauRiskFlavor, k: usize) -> String {
        format!("tau_match_{}/k{k}", flavor.label())
    }

    pub fn tau_rscore(learner: AuxLearner) -> String {
        format!("tau_rscore/{}", learner.label_lower())
    }
}

pub(crate) fn check_equal_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::invalid("metric input is empty"));
    }
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "metric input length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}
