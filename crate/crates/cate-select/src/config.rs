//! Run configuration: a versioned TOML file declaring the data source, the
//! candidate grid, run knobs and the metric set. Schema violations and
//! unknown names are rejected before any fitting starts.

use crate::data::{load_csv_dataset, load_manifest, CsvSchema, DataSource};
use crate::error::{Error, Result};
use crate::estimators::{CandidateSpec, EstimatorConfig, EstimatorKind};
use crate::harness::{MetricsConfig, RunSettings};
use crate::learners::{expand_grid, reduced_grid, FitContext, LearnerFamily};
use crate::metrics::names;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub version: u32,
    pub data: DataSection,
    pub grid: GridSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub metrics: MetricsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub manifest: Option<String>,
    #[serde(default)]
    pub schema: Option<CsvSchema>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub estimators: Vec<String>,
    pub families: Vec<String>,
    /// `true` runs the reduced per-family grids, `false` the full ones.
    #[serde(default = "default_true")]
    pub reduced: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_crossfit")]
    pub n_crossfit: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            ensemble_size: default_ensemble(),
            learning_rate: default_learning_rate(),
            n_crossfit: default_crossfit(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    /// Validation metric groups: mu_risk, mu_risk_r2, plugin, matching,
    /// rscore, policy_risk.
    #[serde(default = "default_validation_groups")]
    pub validation: Vec<String>,
    /// Test metrics: pehe, e_ate, e_att, policy_risk.
    #[serde(default = "default_test_metrics")]
    pub test: Vec<String>,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection { validation: default_validation_groups(), test: default_test_metrics() }
    }
}

fn default_true() -> bool {
    true
}

fn default_ensemble() -> usize {
    1000
}

fn default_learning_rate() -> f64 {
    0.1
}

fn default_crossfit() -> usize {
    5
}

fn default_validation_groups() -> Vec<String> {
    ["mu_risk", "mu_risk_r2", "plugin", "matching", "rscore", "policy_risk"]
        .into_iter()
        .map(String::from)
        .collect()
}

fn default_test_metrics() -> Vec<String> {
    [names::PEHE, names::E_ATE, names::E_ATT, names::POLICY_RISK]
        .into_iter()
        .map(String::from)
        .collect()
}

/// A config resolved against the filesystem: loaded data, expanded
/// candidate grid, and run settings ready for the harness.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub source: DataSource,
    pub candidates: Vec<CandidateSpec>,
    pub settings: RunSettings,
}

pub fn load_run_config(path: impl AsRef<Path>) -> Result<RunConfigFile> {
    let p = path.as_ref();
    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?;
    let cfg: RunConfigFile = toml::from_str(&text)
        .map_err(|e| Error::invalid(format!("bad config {}: {e}", p.display())))?;
    if cfg.version != 1 {
        return Err(Error::invalid(format!(
            "unsupported config version {} (expected 1)",
            cfg.version
        )));
    }
    Ok(cfg)
}

impl RunConfigFile {
    /// Validates every name and loads the data. `base_dir` anchors
    /// relative paths (usually the config file's directory). Name
    /// validation runs before any file is touched so misconfigured runs
    /// fail fast.
    pub fn resolve(&self, base_dir: &Path, parallelism: usize) -> Result<ResolvedConfig> {
        let estimators: Vec<EstimatorKind> = self
            .grid
            .estimators
            .iter()
            .map(|s| EstimatorKind::parse(s))
            .collect::<Result<_>>()?;
        let families: Vec<LearnerFamily> = self
            .grid
            .families
            .iter()
            .map(|s| LearnerFamily::parse(s))
            .collect::<Result<_>>()?;
        if estimators.is_empty() || families.is_empty() {
            return Err(Error::invalid("grid.estimators and grid.families must be nonempty"));
        }
        let metrics = self.metrics_config()?;

        let source = match (&self.data.csv, &self.data.manifest) {
            (Some(csv), None) => {
                let schema = self.data.schema.clone().unwrap_or_default();
                DataSource::Single(load_csv_dataset(base_dir.join(csv), &schema)?)
            }
            (None, Some(manifest)) => load_manifest(base_dir.join(manifest))?,
            (Some(_), Some(_)) => {
                return Err(Error::invalid("config declares both data.csv and data.manifest"))
            }
            (None, None) => {
                return Err(Error::invalid("config declares neither data.csv nor data.manifest"))
            }
        };

        let mut candidates = Vec::new();
        for &family in &families {
            let specs = if self.grid.reduced { reduced_grid(family) } else { expand_grid(family) };
            for learner in specs {
                for &estimator in &estimators {
                    candidates.push(CandidateSpec::new(estimator, learner.clone()));
                }
            }
        }

        let settings = RunSettings {
            metrics,
            estimator: EstimatorConfig {
                fit: FitContext {
                    ensemble_size: self.run.ensemble_size,
                    learning_rate: self.run.learning_rate,
                    seed: self.run.seed,
                },
                n_crossfit: self.run.n_crossfit,
            },
            seed: self.run.seed,
            parallelism,
        };

        Ok(ResolvedConfig { source, candidates, settings })
    }

    fn metrics_config(&self) -> Result<MetricsConfig> {
        let mut cfg = MetricsConfig {
            mu_risk: false,
            mu_risk_r2: false,
            plugin_builders: Vec::new(),
            plugin_flavors: Vec::new(),
            match_ks: Vec::new(),
            match_flavors: Vec::new(),
            rscore_learners: Vec::new(),
            policy_risk_val: false,
            test_metrics: Vec::new(),
        };
        for group in &self.metrics.validation {
            match group.as_str() {
                "mu_risk" => cfg.mu_risk = true,
                "mu_risk_r2" => cfg.mu_risk_r2 = true,
                "plugin" => {
                    cfg.plugin_builders = crate::metrics::plugin::PluginBuilder::all();
                    cfg.plugin_flavors = crate::metrics::TauRiskFlavor::all().to_vec();
                }
                "matching" => {
                    cfg.match_ks = vec![1, 3, 5];
                    cfg.match_flavors = crate::metrics::TauRiskFlavor::all().to_vec();
                }
                "rscore" => cfg.rscore_learners = crate::metrics::AuxLearner::all().to_vec(),
                "policy_risk" => cfg.policy_risk_val = true,
                other => {
                    return Err(Error::invalid(format!("unknown validation metric group '{other}'")))
                }
            }
        }
        for m in &self.metrics.test {
            match m.as_str() {
                names::PEHE | names::E_ATE | names::E_ATT | names::POLICY_RISK => {
                    cfg.test_metrics.push(m.clone());
                }
                other => return Err(Error::invalid(format!("unknown test metric '{other}'"))),
            }
        }
        if cfg.test_metrics.is_empty() {
            return Err(Error::invalid("metrics.test must name at least one test metric"));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(dir: &Path) {
        let mut f = std::fs::File::create(dir.join("data.csv")).unwrap();
        writeln!(f, "x0,t,yf").unwrap();
        for i in 0..40 {
            writeln!(f, "{}.5,{},{}", i, i % 2, i * 2).unwrap();
        }
    }

    #[test]
    fn resolves_a_minimal_config() {
        let dir = tempfile::tempdir().unwrap();
        write_csv(dir.path());
        let cfg_text = r#"
version = 1

[data]
csv = "data.csv"

[data.schema]
t = "t"
yf = "yf"

[grid]
estimators = ["SL", "TL"]
families = ["l2_linear"]
reduced = true

[run]
seed = 9
ensemble_size = 50

[metrics]
validation = ["mu_risk"]
test = ["pehe"]
"#;
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, cfg_text).unwrap();
        let cfg = load_run_config(&cfg_path).unwrap();
        let resolved = cfg.resolve(dir.path(), 2).unwrap();
        // 2 estimators × 3 reduced l2 specs
        assert_eq!(resolved.candidates.len(), 6);
        assert_eq!(resolved.settings.estimator.fit.ensemble_size, 50);
        assert_eq!(resolved.settings.seed, 9);
        assert_eq!(resolved.settings.metrics.validation_metric_names(), vec!["mu_risk"]);
    }

    #[test]
    fn out_of_scope_estimator_is_rejected_before_running() {
        let dir = tempfile::tempdir().unwrap();
        write_csv(dir.path());
        let cfg_text = r#"
version = 1
[data]
csv = "data.csv"
[grid]
estimators = ["causal_forest"]
families = ["tree"]
"#;
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, cfg_text).unwrap();
        let cfg = load_run_config(&cfg_path).unwrap();
        let err = cfg.resolve(dir.path(), 1).unwrap_err();
        assert!(err.to_string().contains("estimator out of scope"), "{err}");
    }

    #[test]
    fn unknown_keys_and_versions_fail_fast() {
        let dir = tempfile::tempdir().unwrap();
        let bad_version = "version = 7\n[data]\ncsv = \"x\"\n[grid]\nestimators = []\nfamilies = []\n";
        let p = dir.path().join("a.toml");
        std::fs::write(&p, bad_version).unwrap();
        assert!(load_run_config(&p).is_err());

        let unknown_key = "version = 1\nbogus = 3\n[data]\ncsv = \"x\"\n[grid]\nestimators = []\nfamilies = []\n";
        std::fs::write(&p, unknown_key).unwrap();
        assert!(load_run_config(&p).is_err());
    }
}
