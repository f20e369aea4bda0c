//! Cross-fitted orthogonal estimators: the Doubly Robust learner (AIPW
//! pseudo-outcome regression) and DML (residual-on-residual with a linear
//! effect stage). Nuisance predictions are strictly out-of-fold.

use super::crossfit::{fold_complement, stratified_folds, OutOfFold};
use super::linear_cate::fit_residual_cate;
use super::{CandidateModel, CandidateSpec, EstimatorConfig, FittedCandidate};
use crate::data::DataView;
use crate::error::{Error, Result};
use crate::learners::{fit_propensity, fit_regressor, PROPENSITY_CLIP};
use crate::numeric::{child_seed, clip};
use ndarray::Array2;

/// AIPW pseudo-outcome per unit:
/// `ψ = μ̂₁(x) − μ̂₀(x) + t·(y − μ̂₁(x))/ê(x) − (1−t)·(y − μ̂₀(x))/(1−ê(x))`.
/// Propensities are clipped before dividing.
pub fn aipw_pseudo_outcomes(
    y: &[f64],
    t: &[u8],
    mu0: &[f64],
    mu1: &[f64],
    e: &[f64],
) -> Vec<f64> {
    (0..y.len())
        .map(|i| {
            let ei = clip(e[i], PROPENSITY_CLIP.0, PROPENSITY_CLIP.1);
            let base = mu1[i] - mu0[i];
            if t[i] == 1 {
                base + (y[i] - mu1[i]) / ei
            } else {
                base - (y[i] - mu0[i]) / (1.0 - ei)
            }
        })
        .collect()
}

struct CrossFitViews {
    folds: Vec<Vec<usize>>,
}

fn gather_rows(view: &DataView, rows: &[usize]) -> (Array2<f64>, Vec<f64>, Vec<u8>) {
    let mut x = Array2::<f64>::zeros((rows.len(), view.dim()));
    let mut y = Vec::with_capacity(rows.len());
    let mut t = Vec::with_capacity(rows.len());
    for (r, &i) in rows.iter().enumerate() {
        x.row_mut(r).assign(&view.x.row(i));
        y.push(view.yf[i]);
        t.push(view.t[i]);
    }
    (x, y, t)
}

fn gather_arm(
    x: &Array2<f64>,
    y: &[f64],
    t: &[u8],
    arm: u8,
) -> (Array2<f64>, Vec<f64>) {
    let idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] == arm).collect();
    let mut xa = Array2::<f64>::zeros((idx.len(), x.ncols()));
    let mut ya = Vec::with_capacity(idx.len());
    for (r, &i) in idx.iter().enumerate() {
        xa.row_mut(r).assign(&x.row(i));
        ya.push(y[i]);
    }
    (xa, ya)
}

fn make_folds(train: &DataView, cfg: &EstimatorConfig, label: &str) -> Result<CrossFitViews> {
    if cfg.n_crossfit < 2 {
        return Err(Error::invalid("internal cross-fitting needs at least 2 folds"));
    }
    let folds = stratified_folds(&train.t, cfg.n_crossfit, child_seed(cfg.fit.seed, label))?;
    Ok(CrossFitViews { folds })
}

/// DR learner: cross-fitted μ̂₀, μ̂₁, ê give every training unit an
/// out-of-fold AIPW pseudo-outcome; the final regressor fits ψ on x. The
/// per-fold outcome models are retained as averaged heads for μ-risk.
pub(super) fn fit_dr_learner(
    spec: &CandidateSpec,
    train: &DataView,
    cfg: &EstimatorConfig,
) -> Result<FittedCandidate> {
    let n = train.n();
    let cross = make_folds(train, cfg, "dr-folds")?;

    let mut oof_mu0 = OutOfFold::new(n, "mu0");
    let mut oof_mu1 = OutOfFold::new(n, "mu1");
    let mut oof_e = OutOfFold::new(n, "propensity");
    let mut fold_mu0 = Vec::with_capacity(cross.folds.len());
    let mut fold_mu1 = Vec::with_capacity(cross.folds.len());

    for (f, fold) in cross.folds.iter().enumerate() {
        let fit_rows = fold_complement(n, fold);
        let (xf, yf, tf) = gather_rows(train, &fit_rows);
        let (x0, y0) = gather_arm(&xf, &yf, &tf, 0);
        let (x1, y1) = gather_arm(&xf, &yf, &tf, 1);

        let sub = |label: String| cfg.fit.with_seed(child_seed(cfg.fit.seed, &label));
        let mu0 = fit_regressor(&spec.learner, x0.view(), &y0, None, &sub(format!("dr-f{f}-mu0")))?;
        let mu1 = fit_regressor(&spec.learner, x1.view(), &y1, None, &sub(format!("dr-f{f}-mu1")))?;
        let e = fit_propensity(&spec.learner, xf.view(), &tf, &sub(format!("dr-f{f}-e")))?;

        let (x_val, _, _) = gather_rows(train, fold);
        oof_mu0.set_fold(fold, &mu0.predict(x_val.view())?)?;
        oof_mu1.set_fold(fold, &mu1.predict(x_val.view())?)?;
        oof_e.set_fold(fold, &e.predict(x_val.view())?)?;

        fold_mu0.push(mu0);
        fold_mu1.push(mu1);
    }

    let mu0_hat = oof_mu0.into_vec()?;
    let mu1_hat = oof_mu1.into_vec()?;
    let e_hat = oof_e.into_vec()?;
    let psi = aipw_pseudo_outcomes(&train.yf, &train.t, &mu0_hat, &mu1_hat, &e_hat);

    let effect = fit_regressor(
        &spec.learner,
        train.x.view(),
        &psi,
        None,
        &cfg.fit.with_seed(child_seed(cfg.fit.seed, "dr-effect")),
    )?;

    Ok(FittedCandidate::from_parts(
        spec.clone(),
        train.dim(),
        CandidateModel::Dr { fold_mu0, fold_mu1, effect },
        Vec::new(),
    ))
}

/// DML: cross-fitted m̂(x) = E[Y|X] and ê(x) = E[T|X], then the exact
/// linear-in-x minimizer of the residual-on-residual square loss. A
/// rank-deficient second stage falls back to a 1e−8 ridge and records a
/// diagnostic.
pub(super) fn fit_dml_learner(
    spec: &CandidateSpec,
    train: &DataView,
    cfg: &EstimatorConfig,
) -> Result<FittedCandidate> {
    let n = train.n();
    let cross = make_folds(train, cfg, "dml-folds")?;

    let mut oof_m = OutOfFold::new(n, "outcome-mean");
    let mut oof_e = OutOfFold::new(n, "propensity");

    for (f, fold) in cross.folds.iter().enumerate() {
        let fit_rows = fold_complement(n, fold);
        let (xf, yf, tf) = gather_rows(train, &fit_rows);

        let sub = |label: String| cfg.fit.with_seed(child_seed(cfg.fit.seed, &label));
        let m = fit_regressor(&spec.learner, xf.view(), &yf, None, &sub(format!("dml-f{f}-m")))?;
        let e = fit_propensity(&spec.learner, xf.view(), &tf, &sub(format!("dml-f{f}-e")))?;

        let (x_val, _, _) = gather_rows(train, fold);
        oof_m.set_fold(fold, &m.predict(x_val.view())?)?;
        oof_e.set_fold(fold, &e.predict(x_val.view())?)?;
    }

    let m_hat = oof_m.into_vec()?;
    let e_hat = oof_e.into_vec()?;
    let y_res: Vec<f64> = (0..n).map(|i| train.yf[i] - m_hat[i]).collect();
    let t_res: Vec<f64> = (0..n).map(|i| train.t[i] as f64 - e_hat[i]).collect();

    let mut diagnostics = Vec::new();
    let model = match fit_residual_cate(train.x.view(), &y_res, &t_res, 0.0) {
        Ok(m) => m,
        Err(_) => {
            diagnostics.push("dml second stage rank-deficient; refit with 1e-8 ridge".to_string());
            fit_residual_cate(train.x.view(), &y_res, &t_res, 1e-8)?
        }
    };

    Ok(FittedCandidate::from_parts(
        spec.clone(),
        train.dim(),
        CandidateModel::Dml { model },
        diagnostics,
    ))
}

/// Nuisance views a DR/DML-style consumer sees; exposed for tests that
/// inject oracle values.
#[allow(dead_code)]
pub(crate) struct InjectedNuisances {
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    pub e: Vec<f64>,
}
