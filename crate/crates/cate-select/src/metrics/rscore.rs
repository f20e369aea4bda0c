//! R-score validation: orthogonalized squared loss on residualized outcome
//! versus residualized treatment, normalized by the best linear effect
//! model so constant-effect predictions are penalized.

use super::mu::r_squared;
use super::{AuxLearner, MetricOutcome};
use crate::data::DataView;
use crate::error::{Error, Result};
use crate::estimators::crossfit::{fold_complement, stratified_folds, OutOfFold};
use crate::estimators::{fit_residual_cate, LinearCate};
use crate::learners::{expand_grid, fit_propensity, fit_regressor, FitContext, LearnerSpec};
use crate::numeric::{child_seed, mean};

const SELECTION_FOLDS: usize = 5;
const BASE_RIDGE: f64 = 1e-8;

/// Out-of-fold nuisance estimates on one validation fold: m̂(x) = E[Y|X]
/// and the clipped ê(x) = E[T|X].
#[derive(Debug, Clone)]
pub struct NuisancePair {
    pub m_hat: Vec<f64>,
    pub e_hat: Vec<f64>,
    pub m_hyper: String,
    pub e_hyper: String,
}

fn cv_select<S>(grid: &[LearnerSpec], folds: &[Vec<usize>], val: &DataView, score: S) -> Result<LearnerSpec>
where
    S: Fn(&LearnerSpec, &DataView, &DataView, usize) -> Option<f64>,
{
    let mut best: Option<(f64, LearnerSpec)> = None;
    for spec in grid {
        let mut scores = Vec::new();
        for fold in folds {
            let fit_rows = fold_complement(val.n(), fold);
            let fit_view = val.subset(&fit_rows);
            let hold_view = val.subset(fold);
            if let Some(s) = score(spec, &fit_view, &hold_view, scores.len()) {
                scores.push(s);
            }
        }
        if !scores.is_empty() {
            let avg = mean(&scores);
            if best.as_ref().is_none_or(|(b, _)| avg > *b) {
                best = Some((avg, spec.clone()));
            }
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::invalid("nuisance selection: every grid point failed"))
}

/// Selects both nuisance models over the family's grid (regressor by R²,
/// classifier by Brier score, each under stratified 5-fold CV), then
/// realizes them out-of-fold by 5-fold cross-fitting.
pub fn fit_rscore_nuisances(
    family: AuxLearner,
    val: &DataView,
    seed: u64,
    fit: &FitContext,
) -> Result<NuisancePair> {
    for (name, count) in
        [("treated", val.treated_indices().len()), ("control", val.control_indices().len())]
    {
        if count < SELECTION_FOLDS {
            return Err(Error::invalid(format!(
                "R-score nuisances need at least {SELECTION_FOLDS} {name} units in the validation fold, found {count}"
            )));
        }
    }
    let grid = expand_grid(family.family());
    let folds = stratified_folds(&val.t, SELECTION_FOLDS, child_seed(seed, "rscore-select"))?;

    let m_spec = cv_select(&grid, &folds, val, |spec, fit_view, hold_view, f| {
        let ctx = fit.with_seed(child_seed(seed, &format!("rscore-m-cv-{f}")));
        let model = fit_regressor(spec, fit_view.x.view(), &fit_view.yf, None, &ctx).ok()?;
        let pred = model.predict(hold_view.x.view()).ok()?;
        r_squared(&hold_view.yf, &pred)
    })?;

    let e_spec = cv_select(&grid, &folds, val, |spec, fit_view, hold_view, f| {
        let ctx = fit.with_seed(child_seed(seed, &format!("rscore-e-cv-{f}")));
        let model = fit_propensity(spec, fit_view.x.view(), &fit_view.t, &ctx).ok()?;
        let pred = model.predict(hold_view.x.view()).ok()?;
        // negated Brier score so higher is better
        let brier = hold_view
            .t
            .iter()
            .zip(&pred)
            .map(|(&t, p)| (t as f64 - p) * (t as f64 - p))
            .sum::<f64>()
            / hold_view.n() as f64;
        Some(-brier)
    })?;

    let cross = stratified_folds(&val.t, SELECTION_FOLDS, child_seed(seed, "rscore-crossfit"))?;
    let mut oof_m = OutOfFold::new(val.n(), "rscore-m");
    let mut oof_e = OutOfFold::new(val.n(), "rscore-e");
    for (f, fold) in cross.iter().enumerate() {
        let fit_rows = fold_complement(val.n(), fold);
        let fit_view = val.subset(&fit_rows);
        let hold_view = val.subset(fold);
        let m_ctx = fit.with_seed(child_seed(seed, &format!("rscore-m-{f}")));
        let e_ctx = fit.with_seed(child_seed(seed, &format!("rscore-e-{f}")));
        let m = fit_regressor(&m_spec, fit_view.x.view(), &fit_view.yf, None, &m_ctx)?;
        let e = fit_propensity(&e_spec, fit_view.x.view(), &fit_view.t, &e_ctx)?;
        oof_m.set_fold(fold, &m.predict(hold_view.x.view())?)?;
        oof_e.set_fold(fold, &e.predict(hold_view.x.view())?)?;
    }

    Ok(NuisancePair {
        m_hat: oof_m.into_vec()?,
        e_hat: oof_e.into_vec()?,
        m_hyper: m_spec.hyper_id(),
        e_hyper: e_spec.hyper_id(),
    })
}

/// Orthogonalized square loss of an effect function's predictions.
pub fn r_loss(tau: &[f64], val: &DataView, nuis: &NuisancePair) -> f64 {
    let n = val.n();
    (0..n)
        .map(|i| {
            let y_res = val.yf[i] - nuis.m_hat[i];
            let t_res = val.t[i] as f64 - nuis.e_hat[i];
            let r = y_res - t_res * tau[i];
            r * r
        })
        .sum::<f64>()
        / n as f64
}

/// The linear effect model minimizing the R-loss on this fold; the base
/// every candidate is scored relative to.
pub fn fit_rloss_base(val: &DataView, nuis: &NuisancePair) -> Result<LinearCate> {
    let y_res: Vec<f64> = (0..val.n()).map(|i| val.yf[i] - nuis.m_hat[i]).collect();
    let t_res: Vec<f64> = (0..val.n()).map(|i| val.t[i] as f64 - nuis.e_hat[i]).collect();
    fit_residual_cate(val.x.view(), &y_res, &t_res, BASE_RIDGE)
}

/// R-score: 1 − L(τ̂)/L(base). 1 is perfect, 0 matches the linear base,
/// negative is worse than the base. Unavailable when the base loss is
/// exactly zero (degenerate noiseless fold).
pub fn tau_risk_r(
    tau_hat_val: &[f64],
    val: &DataView,
    nuis: &NuisancePair,
) -> Result<MetricOutcome> {
    if tau_hat_val.len() != val.n() {
        return Err(Error::invalid("tau_hat must cover the validation fold"));
    }
    let base = fit_rloss_base(val, nuis)?;
    let base_tau = base.predict(val.x.view());
    let l_base = r_loss(&base_tau, val, nuis);
    if l_base <= 0.0 {
        return Ok(MetricOutcome::unavailable("degenerate fold: base R-loss is zero"));
    }
    let l_cate = r_loss(tau_hat_val, val, nuis);
    Ok(MetricOutcome::Value(1.0 - l_cate / l_base))
}
