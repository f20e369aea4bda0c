//! Ground-truth test metrics: PEHE, ATE error, ATT error, and policy risk.

use super::check_equal_lengths;
use crate::data::DataView;
use crate::error::{Error, Result};
use crate::numeric::mean;

/// Root mean squared error between predicted and true per-unit effects.
pub fn pehe(tau_hat: &[f64], tau_true: &[f64]) -> Result<f64> {
    check_equal_lengths(tau_hat, tau_true)?;
    let mse = tau_hat
        .iter()
        .zip(tau_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / tau_hat.len() as f64;
    Ok(mse.sqrt())
}

/// Absolute difference between predicted and true average effects.
pub fn e_ate(tau_hat: &[f64], tau_true: &[f64]) -> Result<f64> {
    check_equal_lengths(tau_hat, tau_true)?;
    Ok((mean(tau_hat) - mean(tau_true)).abs())
}

/// ATT error on experimental-flagged data: the true ATT is the treated
/// mean outcome minus the mean outcome of experimental controls; the
/// estimate is the mean predicted effect over treated units.
pub fn e_att(tau_hat: &[f64], data: &DataView) -> Result<f64> {
    if tau_hat.len() != data.n() {
        return Err(Error::invalid("tau_hat must cover every unit"));
    }
    let exp_flag = data
        .exp_flag
        .as_ref()
        .ok_or_else(|| Error::invalid("ATT error requires the experimental-sample flag"))?;

    let mut treated_y = Vec::new();
    let mut treated_tau = Vec::new();
    let mut exp_control_y = Vec::new();
    for i in 0..data.n() {
        if data.t[i] == 1 {
            treated_y.push(data.yf[i]);
            treated_tau.push(tau_hat[i]);
        } else if exp_flag[i] == 1 {
            exp_control_y.push(data.yf[i]);
        }
    }
    if treated_y.is_empty() {
        return Err(Error::invalid("ATT error: no treated units"));
    }
    if exp_control_y.is_empty() {
        return Err(Error::invalid("ATT error: no experimental controls"));
    }
    let att = mean(&treated_y) - mean(&exp_control_y);
    Ok((att - mean(&treated_tau)).abs())
}

/// Policy risk evaluation. `value` is 1 minus the expected outcome of
/// treating exactly the units with predicted positive effect; empty
/// conditional-mean cells contribute zero with their policy fraction and
/// are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRiskReport {
    pub value: f64,
    pub empty_treat_cell: bool,
    pub empty_control_cell: bool,
    /// Units the estimate was computed on (the experimental subset when an
    /// experimental flag is present).
    pub n_used: usize,
}

/// Policy risk of the deterministic policy π(x) = 1 iff τ̂(x) > 0 (strict:
/// a zero effect abstains). Conditional means come from units whose
/// observed treatment matches the policy; with an experimental flag the
/// whole computation is restricted to the experimental subset.
pub fn policy_risk(tau_hat: &[f64], data: &DataView) -> Result<PolicyRiskReport> {
    if tau_hat.len() != data.n() {
        return Err(Error::invalid("tau_hat must cover every unit"));
    }
    let rows: Vec<usize> = match &data.exp_flag {
        Some(flags) => (0..data.n()).filter(|&i| flags[i] == 1).collect(),
        None => (0..data.n()).collect(),
    };
    if rows.is_empty() {
        return Err(Error::invalid("policy risk: no usable rows"));
    }

    let mut n_pi1 = 0usize;
    let mut treat_cell = Vec::new();
    let mut control_cell = Vec::new();
    for &i in &rows {
        let pi = tau_hat[i] > 0.0;
        if pi {
            n_pi1 += 1;
            if data.t[i] == 1 {
                treat_cell.push(data.yf[i]);
            }
        } else if data.t[i] == 0 {
            control_cell.push(data.yf[i]);
        }
    }
    if treat_cell.is_empty() && control_cell.is_empty() {
        return Err(Error::invalid(
            "policy risk: policy never matches the observed treatment anywhere",
        ));
    }

    let n = rows.len() as f64;
    let p1 = n_pi1 as f64 / n;
    let p0 = 1.0 - p1;
    let e1 = if treat_cell.is_empty() { 0.0 } else { mean(&treat_cell) };
    let e0 = if control_cell.is_empty() { 0.0 } else { mean(&control_cell) };

    let empty_treat_cell = treat_cell.is_empty() && n_pi1 > 0;
    let empty_control_cell = control_cell.is_empty() && n_pi1 < rows.len();
    if empty_treat_cell || empty_control_cell {
        log::warn!(
            "policy risk: empty conditional cell(s) (treated: {empty_treat_cell}, control: {empty_control_cell}); they contribute zero"
        );
    }

    Ok(PolicyRiskReport {
        value: 1.0 - (e1 * p1 + e0 * p0),
        empty_treat_cell,
        empty_control_cell,
        n_used: rows.len(),
    })
}
