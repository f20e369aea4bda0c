//! Factual-outcome validation metrics: μ-risk (MSE on the observed arm's
//! head) and its R² variant.

use super::MetricOutcome;
use crate::data::DataView;
use crate::error::Result;
use crate::estimators::FittedCandidate;
use crate::numeric::mean;

/// Mean squared error on factual outcomes, scored through the head of the
/// arm each unit was actually observed in. Unavailable for candidates
/// without outcome heads.
pub fn mu_risk(fc: &FittedCandidate, val: &DataView) -> Result<MetricOutcome> {
    let Some((mu0, mu1)) = fc.predict_outcomes(val.x.view())? else {
        return Ok(MetricOutcome::unavailable("estimator exposes no outcome predictions"));
    };
    let n = val.n();
    let mse = (0..n)
        .map(|i| {
            let pred = if val.t[i] == 1 { mu1[i] } else { mu0[i] };
            (val.yf[i] - pred) * (val.yf[i] - pred)
        })
        .sum::<f64>()
        / n as f64;
    Ok(MetricOutcome::Value(mse))
}

/// R² on factual outcomes: 1 − SS_res/SS_tot. Defined only for the
/// regression-adjustment estimators flagged eligible; unavailable when the
/// validation outcomes have zero variance.
pub fn mu_risk_r2(fc: &FittedCandidate, val: &DataView) -> Result<MetricOutcome> {
    if !fc.mu_risk_r2_eligible() {
        return Ok(MetricOutcome::unavailable("estimator not in the R² availability set"));
    }
    let Some((mu0, mu1)) = fc.predict_outcomes(val.x.view())? else {
        return Ok(MetricOutcome::unavailable("estimator exposes no outcome predictions"));
    };
    let y_bar = mean(&val.yf);
    let ss_tot: f64 = val.yf.iter().map(|y| (y - y_bar) * (y - y_bar)).sum();
    if ss_tot <= 0.0 {
        return Ok(MetricOutcome::unavailable("zero outcome variance on validation fold"));
    }
    let ss_res: f64 = (0..val.n())
        .map(|i| {
            let pred = if val.t[i] == 1 { mu1[i] } else { mu0[i] };
            (val.yf[i] - pred) * (val.yf[i] - pred)
        })
        .sum();
    Ok(MetricOutcome::Value(1.0 - ss_res / ss_tot))
}

/// Plain R² of predictions against targets, shared by the inner selection
/// loops of the learning-based metrics.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Option<f64> {
    let y_bar = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - y_bar) * (v - y_bar)).sum();
    if ss_tot <= 0.0 {
        return None;
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Some(1.0 - ss_res / ss_tot)
}
