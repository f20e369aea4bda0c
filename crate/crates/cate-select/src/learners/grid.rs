//! Hyperparameter search spaces per base learner, full and reduced, with
//! default-marked assignments.

use super::{LearnerFamily, LearnerSpec, ParamValue};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

const LINEAR_ALPHAS: [f64; 8] = [0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 20.0];
const LINEAR_ALPHA_DEFAULT: f64 = 1.0;
const LINEAR_MAX_ITERS: [i64; 2] = [1000, 10000];
const LINEAR_MAX_ITER_DEFAULT: i64 = 1000;

const TREE_MAX_DEPTHS: [i64; 11] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20];
const TREE_MAX_DEPTH_DEFAULT: i64 = 20;
const TREE_MIN_LEAF_FRACTIONS: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];
const TREE_MIN_LEAF_COUNTS: [i64; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];
const TREE_MIN_LEAF_DEFAULT: i64 = 1;

const KR_ALPHAS: [f64; 4] = [0.001, 0.01, 0.1, 1.0];
const KR_ALPHA_DEFAULT: f64 = 1.0;
const KR_GAMMAS: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
const KR_GAMMA_DEFAULT: f64 = 1.0;
const KR_KERNELS: [&str; 2] = ["rbf", "poly"];
const KR_KERNEL_DEFAULT: &str = "poly";
const KR_DEGREES: [i64; 3] = [2, 3, 4];
const KR_DEGREE_DEFAULT: i64 = 3;

const GBT_LIGHT_DEPTHS: [i64; 6] = [5, 6, 7, 8, 9, 10];
const GBT_LIGHT_DEPTH_DEFAULT: i64 = 10;
const GBT_LIGHT_LAMBDAS: [f64; 5] = [0.0, 0.1, 1.0, 5.0, 10.0];
const GBT_LIGHT_LAMBDA_DEFAULT: f64 = 0.1;

const GBT_CAT_DEPTHS: [i64; 6] = [5, 6, 7, 8, 9, 10];
const GBT_CAT_DEPTH_DEFAULT: i64 = 10;
const GBT_CAT_LAMBDAS: [f64; 4] = [1.0, 3.0, 10.0, 100.0];
const GBT_CAT_LAMBDA_DEFAULT: f64 = 1.0;

fn spec(family: LearnerFamily, params: Vec<(&str, ParamValue)>) -> LearnerSpec {
    let map: BTreeMap<String, ParamValue> =
        params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    LearnerSpec::new_unchecked(family, map)
}

fn min_leaf_values() -> Vec<ParamValue> {
    let mut out: Vec<ParamValue> =
        TREE_MIN_LEAF_FRACTIONS.iter().map(|&v| ParamValue::Float(v)).collect();
    out.extend(TREE_MIN_LEAF_COUNTS.iter().map(|&v| ParamValue::Int(v)));
    out
}

/// Full Cartesian product of the family's grid in deterministic order. The
/// rbf kernel ignores the polynomial degree, so its combinations are
/// deduplicated (kernel ridge expands to 80 specs, not 120).
pub fn expand_grid(family: LearnerFamily) -> Vec<LearnerSpec> {
    match family {
        LearnerFamily::L1Linear | LearnerFamily::L2Linear => {
            let mut out = Vec::new();
            for &alpha in &LINEAR_ALPHAS {
                for &mi in &LINEAR_MAX_ITERS {
                    out.push(spec(
                        family,
                        vec![("alpha", ParamValue::Float(alpha)), ("max_iter", ParamValue::Int(mi))],
                    ));
                }
            }
            out
        }
        LearnerFamily::Tree | LearnerFamily::RandomForest | LearnerFamily::ExtraTrees => {
            let mut out = Vec::new();
            for &depth in &TREE_MAX_DEPTHS {
                for leaf in min_leaf_values() {
                    out.push(spec(
                        family,
                        vec![
                            ("max_depth", ParamValue::Int(depth)),
                            ("min_samples_leaf", leaf),
                        ],
                    ));
                }
            }
            out
        }
        LearnerFamily::KernelRidge => {
            let mut out = Vec::new();
            for &alpha in &KR_ALPHAS {
                for &gamma in &KR_GAMMAS {
                    for &kernel in &KR_KERNELS {
                        if kernel == "rbf" {
                            out.push(spec(
                                family,
                                vec![
                                    ("alpha", ParamValue::Float(alpha)),
                                    ("gamma", ParamValue::Float(gamma)),
                                    ("kernel", ParamValue::Str(kernel.into())),
                                ],
                            ));
                        } else {
                            for &degree in &KR_DEGREES {
                                out.push(spec(
                                    family,
                                    vec![
                                        ("alpha", ParamValue::Float(alpha)),
                                        ("gamma", ParamValue::Float(gamma)),
                                        ("kernel", ParamValue::Str(kernel.into())),
                                        ("degree", ParamValue::Int(degree)),
                                    ],
                                ));
                            }
                        }
                    }
                }
            }
            out
        }
        LearnerFamily::GbtLight => {
            let mut out = Vec::new();
            for &depth in &GBT_LIGHT_DEPTHS {
                for &lambda in &GBT_LIGHT_LAMBDAS {
                    out.push(spec(
                        family,
                        vec![
                            ("max_depth", ParamValue::Int(depth)),
                            ("reg_lambda", ParamValue::Float(lambda)),
                        ],
                    ));
                }
            }
            out
        }
        LearnerFamily::GbtCat => {
            let mut out = Vec::new();
            for &depth in &GBT_CAT_DEPTHS {
                for &lambda in &GBT_CAT_LAMBDAS {
                    out.push(spec(
                        family,
                        vec![
                            ("depth", ParamValue::Int(depth)),
                            ("l2_leaf_reg", ParamValue::Float(lambda)),
                        ],
                    ));
                }
            }
            out
        }
    }
}

/// The default-marked assignment of the family's grid.
pub fn default_spec(family: LearnerFamily) -> LearnerSpec {
    match family {
        LearnerFamily::L1Linear | LearnerFamily::L2Linear => spec(
            family,
            vec![
                ("alpha", ParamValue::Float(LINEAR_ALPHA_DEFAULT)),
                ("max_iter", ParamValue::Int(LINEAR_MAX_ITER_DEFAULT)),
            ],
        ),
        LearnerFamily::Tree | LearnerFamily::RandomForest | LearnerFamily::ExtraTrees => spec(
            family,
            vec![
                ("max_depth", ParamValue::Int(TREE_MAX_DEPTH_DEFAULT)),
                ("min_samples_leaf", ParamValue::Int(TREE_MIN_LEAF_DEFAULT)),
            ],
        ),
        LearnerFamily::KernelRidge => spec(
            family,
            vec![
                ("alpha", ParamValue::Float(KR_ALPHA_DEFAULT)),
                ("gamma", ParamValue::Float(KR_GAMMA_DEFAULT)),
                ("kernel", ParamValue::Str(KR_KERNEL_DEFAULT.into())),
                ("degree", ParamValue::Int(KR_DEGREE_DEFAULT)),
            ],
        ),
        LearnerFamily::GbtLight => spec(
            family,
            vec![
                ("max_depth", ParamValue::Int(GBT_LIGHT_DEPTH_DEFAULT)),
                ("reg_lambda", ParamValue::Float(GBT_LIGHT_LAMBDA_DEFAULT)),
            ],
        ),
        LearnerFamily::GbtCat => spec(
            family,
            vec![
                ("depth", ParamValue::Int(GBT_CAT_DEPTH_DEFAULT)),
                ("l2_leaf_reg", ParamValue::Float(GBT_CAT_LAMBDA_DEFAULT)),
            ],
        ),
    }
}

/// Small deterministic subset of each grid (defaults always included) for
/// runs where the full product would be wasteful, e.g. smoke suites.
pub fn reduced_grid(family: LearnerFamily) -> Vec<LearnerSpec> {
    match family {
        LearnerFamily::L1Linear | LearnerFamily::L2Linear => [0.1, 1.0, 10.0]
            .iter()
            .map(|&alpha| {
                spec(
                    family,
                    vec![("alpha", ParamValue::Float(alpha)), ("max_iter", ParamValue::Int(1000))],
                )
            })
            .collect(),
        LearnerFamily::Tree | LearnerFamily::RandomForest | LearnerFamily::ExtraTrees => {
            let mut out = Vec::new();
            for depth in [3, 20] {
                for leaf in [1, 5] {
                    out.push(spec(
                        family,
                        vec![
                            ("max_depth", ParamValue::Int(depth)),
                            ("min_samples_leaf", ParamValue::Int(leaf)),
                        ],
                    ));
                }
            }
            out
        }
        LearnerFamily::KernelRidge => {
            let mut out = Vec::new();
            for alpha in [0.1, 1.0] {
                for gamma in [0.1, 1.0] {
                    out.push(spec(
                        family,
                        vec![
                            ("alpha", ParamValue::Float(alpha)),
                            ("gamma", ParamValue::Float(gamma)),
                            ("kernel", ParamValue::Str("rbf".into())),
                        ],
                    ));
                    out.push(spec(
                        family,
                        vec![
                            ("alpha", ParamValue::Float(alpha)),
                            ("gamma", ParamValue::Float(gamma)),
                            ("kernel", ParamValue::Str("poly".into())),
                            ("degree", ParamValue::Int(3)),
                        ],
                    ));
                }
            }
            out
        }
        LearnerFamily::GbtLight => {
            let mut out = Vec::new();
            for depth in [5, 10] {
                for lambda in [0.1, 1.0] {
                    out.push(spec(
                        family,
                        vec![
                            ("max_depth", ParamValue::Int(depth)),
                            ("reg_lambda", ParamValue::Float(lambda)),
                        ],
                    ));
                }
            }
            out
        }
        LearnerFamily::GbtCat => {
            let mut out = Vec::new();
            for depth in [5, 10] {
                for lambda in [1.0, 10.0] {
                    out.push(spec(
                        family,
                        vec![
                            ("depth", ParamValue::Int(depth)),
                            ("l2_leaf_reg", ParamValue::Float(lambda)),
                        ],
                    ));
                }
            }
            out
        }
    }
}

fn allowed(actual: &ParamValue, allowed_values: &[ParamValue]) -> bool {
    allowed_values.iter().any(|v| v == actual)
}

/// Validates that a spec's parameter names and values come from its
/// family's grid domain.
pub(crate) fn validate_spec(s: &LearnerSpec) -> Result<()> {
    let family = s.family();
    let id = s.id();
    let require = |name: &str| -> Result<&ParamValue> {
        s.params()
            .get(name)
            .ok_or_else(|| Error::invalid(format!("{id}: missing parameter '{name}'")))
    };
    let check_known = |names: &[&str]| -> Result<()> {
        for k in s.params().keys() {
            if !names.contains(&k.as_str()) {
                return Err(Error::invalid(format!("{id}: unknown parameter '{k}'")));
            }
        }
        Ok(())
    };
    match family {
        LearnerFamily::L1Linear | LearnerFamily::L2Linear => {
            check_known(&["alpha", "max_iter"])?;
            let alphas: Vec<ParamValue> = LINEAR_ALPHAS.iter().map(|&a| ParamValue::Float(a)).collect();
            if !allowed(require("alpha")?, &alphas) {
                return Err(Error::invalid(format!("{id}: alpha outside grid domain")));
            }
            let iters: Vec<ParamValue> = LINEAR_MAX_ITERS.iter().map(|&v| ParamValue::Int(v)).collect();
            if !allowed(require("max_iter")?, &iters) {
                return Err(Error::invalid(format!("{id}: max_iter outside grid domain")));
            }
        }
        LearnerFamily::Tree | LearnerFamily::RandomForest | LearnerFamily::ExtraTrees => {
            check_known(&["max_depth", "min_samples_leaf"])?;
            let depths: Vec<ParamValue> = TREE_MAX_DEPTHS.iter().map(|&v| ParamValue::Int(v)).collect();
            if !allowed(require("max_depth")?, &depths) {
                return Err(Error::invalid(format!("{id}: max_depth outside grid domain")));
            }
            if !allowed(require("min_samples_leaf")?, &min_leaf_values()) {
                return Err(Error::invalid(format!("{id}: min_samples_leaf outside grid domain")));
            }
        }
        LearnerFamily::KernelRidge => {
            check_known(&["alpha", "gamma", "kernel", "degree"])?;
            let alphas: Vec<ParamValue> = KR_ALPHAS.iter().map(|&v| ParamValue::Float(v)).collect();
            let gammas: Vec<ParamValue> = KR_GAMMAS.iter().map(|&v| ParamValue::Float(v)).collect();
            if !allowed(require("alpha")?, &alphas) {
                return Err(Error::invalid(format!("{id}: alpha outside grid domain")));
            }
            if !allowed(require("gamma")?, &gammas) {
                return Err(Error::invalid(format!("{id}: gamma outside grid domain")));
            }
            let kernel = require("kernel")?;
            let kernel_name = kernel.as_str().unwrap_or("");
            if !KR_KERNELS.contains(&kernel_name) {
                return Err(Error::invalid(format!("{id}: unknown kernel")));
            }
            match (kernel_name, s.params().get("degree")) {
                ("poly", Some(d)) => {
                    let degrees: Vec<ParamValue> =
                        KR_DEGREES.iter().map(|&v| ParamValue::Int(v)).collect();
                    if !allowed(d, &degrees) {
                        return Err(Error::invalid(format!("{id}: degree outside grid domain")));
                    }
                }
                ("poly", None) => {
                    return Err(Error::invalid(format!("{id}: poly kernel requires degree")))
                }
                // rbf ignores degree; a stray degree key would create
                // duplicate grid points under different ids
                ("rbf", Some(_)) => {
                    return Err(Error::invalid(format!("{id}: rbf kernel takes no degree")))
                }
                _ => {}
            }
        }
        LearnerFamily::GbtLight => {
            check_known(&["max_depth", "reg_lambda"])?;
            let depths: Vec<ParamValue> = GBT_LIGHT_DEPTHS.iter().map(|&v| ParamValue::Int(v)).collect();
            let lambdas: Vec<ParamValue> =
                GBT_LIGHT_LAMBDAS.iter().map(|&v| ParamValue::Float(v)).collect();
            if !allowed(require("max_depth")?, &depths) {
                return Err(Error::invalid(format!("{id}: max_depth outside grid domain")));
            }
            if !allowed(require("reg_lambda")?, &lambdas) {
                return Err(Error::invalid(format!("{id}: reg_lambda outside grid domain")));
            }
        }
        LearnerFamily::GbtCat => {
            check_known(&["depth", "l2_leaf_reg"])?;
            let depths: Vec<ParamValue> = GBT_CAT_DEPTHS.iter().map(|&v| ParamValue::Int(v)).collect();
            let lambdas: Vec<ParamValue> =
                GBT_CAT_LAMBDAS.iter().map(|&v| ParamValue::Float(v)).collect();
            if !allowed(require("depth")?, &depths) {
                return Err(Error::invalid(format!("{id}: depth outside grid domain")));
            }
            if !allowed(require("l2_leaf_reg")?, &lambdas) {
                return Err(Error::invalid(format!("{id}: l2_leaf_reg outside grid domain")));
            }
        }
    }
    Ok(())
}
