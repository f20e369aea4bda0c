//! Regression-adjustment meta-learners: S-Learner, T-Learner, X-Learner,
//! and the propensity-weighted T-Learner used for IPSW.

use super::{
    append_treatment_col, arm_data, CandidateModel, CandidateSpec, EstimatorConfig,
    FittedCandidate,
};
use crate::data::DataView;
use crate::error::{Error, Result};
use crate::learners::{fit_propensity, fit_regressor, FitContext};
use crate::numeric::{child_seed, mean};

fn require_arms(train: &DataView, min_per_arm: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let treated = train.treated_indices();
    let control = train.control_indices();
    if treated.len() < min_per_arm || control.len() < min_per_arm {
        return Err(Error::invalid(format!(
            "need at least {min_per_arm} units per arm (treated {}, control {})",
            treated.len(),
            control.len()
        )));
    }
    Ok((treated, control))
}

fn sub_ctx(cfg: &EstimatorConfig, label: &str) -> FitContext {
    cfg.fit.with_seed(child_seed(cfg.fit.seed, label))
}

/// Single learner μ(t, x) on the treatment-augmented covariates;
/// τ̂(x) = μ̂(1, x) − μ̂(0, x).
pub(super) fn fit_s_learner(
    spec: &CandidateSpec,
    train: &DataView,
    cfg: &EstimatorConfig,
) -> Result<FittedCandidate> {
    require_arms(train, 1)?;
    let x_aug = append_treatment_col(train.x.view(), &train.t);
    let model = fit_regressor(&spec.learner, x_aug.view(), &train.yf, None, &sub_ctx(cfg, "sl"))?;
    Ok(FittedCandidate::from_parts(
        spec.clone(),
        train.dim(),
        CandidateModel::S { model },
        Vec::new(),
    ))
}

/// Arm-wise regressors μ̂₀, μ̂₁; τ̂ = μ̂₁ − μ̂₀.
pub(super) fn fit_t_learner(
    spec: &CandidateSpec,
    train: &DataView,
    cfg: &EstimatorConfig,
) -> Result<FittedCandidate> {
    require_arms(train, 2)?;
    let (x0, y0, _) = arm_data(train, 0, None);
    let (x1, y1, _) = arm_data(train, 1, None);
    let mu0 = fit_regressor(&spec.learner, x0.view(), &y0, None, &sub_ctx(cfg, "tl-mu0"))?;
    let mu1 = fit_regressor(&spec.learner, x1.view(), &y1, None, &sub_ctx(cfg, "tl-mu1"))?;
    Ok(FittedCandidate::from_parts(
        spec.clone(),
        train.dim(),
        CandidateModel::T { mu0, mu1 },
        Vec::new(),
    ))
}

/// T-Learner stage, imputed-effect regressions per arm, then a propensity
/// blend: τ̂(x) = ê(x)·τ̂₀(x) + (1 − ê(x))·τ̂₁(x).
pub(super) fn fit_x_learner(
    spec: &CandidateSpec,
    train: &DataView,
    cfg: &EstimatorConfig,
) -> Result<FittedCandidate> {
    require_arms(train, 2)?;
    let (x0, y0, _) = arm_data(train, 0, None);
    let (x1, y1, _) = arm_data(train, 1, None);
    let mu0 = fit_regressor(&spec.learner, x0.view(), &y0, None, &sub_ctx(cfg, "xl-mu0"))?;
    let mu1 = fit_regressor(&spec.learner, x1.view(), &y1, None, &sub_ctx(cfg, "xl-mu1"))?;

    // imputed effects: D1 = y1 − μ̂0(x1) on treated, D0 = μ̂1(x0) − y0 on controls
    let d1: Vec<f64> =
        y1.iter().zip(mu0.predict(x1.view())?).map(|(yi, m)| yi - m).collect();
    let d0: Vec<f64> =
        mu1.predict(x0.view())?.iter().zip(&y0).map(|(m, yi)| m - yi).collect();

    let tau1 = fit_regressor(&spec.learner, x1.view(), &d1, None, &sub_ctx(cfg, "xl-tau1"))?;
    let tau0 = fit_regressor(&spec.learner, x0.view(), &d0, None, &sub_ctx(cfg, "xl-tau0"))?;
    let propensity =
        fit_propensity(&spec.learner, train.x.view(), &train.t, &sub_ctx(cfg, "xl-e"))?;

    Ok(FittedCandidate::from_parts(
        spec.clone(),
        train.dim(),
        CandidateModel::X { tau0, tau1, propensity },
        Vec::new(),
    ))
}

/// T-Learner whose arm regressors carry inverse-propensity weights
/// (treated 1/ê, control 1/(1−ê)). Weights are normalized to mean one per
/// arm so a uniform propensity reproduces the plain T-Learner exactly.
pub(super) fn fit_ipsw_learner(
    spec: &CandidateSpec,
    train: &DataView,
    cfg: &EstimatorConfig,
) -> Result<FittedCandidate> {
    require_arms(train, 1)?;
    let propensity =
        fit_propensity(&spec.learner, train.x.view(), &train.t, &sub_ctx(cfg, "ipsw-e"))?;
    let e = propensity.predict(train.x.view())?;

    let weights: Vec<f64> = (0..train.n())
        .map(|i| if train.t[i] == 1 { 1.0 / e[i] } else { 1.0 / (1.0 - e[i]) })
        .collect();
    let mut arm_weights = weights;
    for arm in [0u8, 1u8] {
        let idx: Vec<usize> = (0..train.n()).filter(|&i| train.t[i] == arm).collect();
        let m = mean(&idx.iter().map(|&i| arm_weights[i]).collect::<Vec<f64>>());
        for &i in &idx {
            arm_weights[i] /= m;
        }
    }

    let (x0, y0, w0) = arm_data(train, 0, Some(&arm_weights));
    let (x1, y1, w1) = arm_data(train, 1, Some(&arm_weights));
    let mu0 = fit_regressor(&spec.learner, x0.view(), &y0, w0.as_deref(), &sub_ctx(cfg, "ipsw-mu0"))?;
    let mu1 = fit_regressor(&spec.learner, x1.view(), &y1, w1.as_deref(), &sub_ctx(cfg, "ipsw-mu1"))?;
    Ok(FittedCandidate::from_parts(
        spec.clone(),
        train.dim(),
        CandidateModel::T { mu0, mu1 },
        Vec::new(),
    ))
}
