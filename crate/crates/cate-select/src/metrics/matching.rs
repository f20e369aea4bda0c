//! Matching validation: counterfactuals imputed from the k nearest
//! opposite-arm neighbours (Euclidean distance on standardized
//! covariates), inverse-distance weighted. An exact match (distance zero)
//! takes that neighbour's outcome outright — the weighting's limit
//! behaviour; ties on zero distance average.

use super::{check_equal_lengths, MetricOutcome, TauRiskFlavor};
use crate::data::DataView;
use crate::error::{Error, Result};
use crate::metrics::truth::pehe;
use crate::numeric::{mean, Standardizer};

/// Matched pseudo-effects: per unit, factual outcome combined with the
/// kNN-imputed counterfactual, signed by arm (treated: y − ŷ₀; control:
/// ŷ₁ − y).
pub fn tau_match_truth(val: &DataView, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("matching needs k >= 1"));
    }
    let treated = val.treated_indices();
    let control = val.control_indices();
    for (name, arm) in [("treated", &treated), ("control", &control)] {
        if arm.len() < k {
            return Err(Error::invalid(format!(
                "matching with k={k} needs at least {k} {name} units, found {}",
                arm.len()
            )));
        }
    }

    let standardizer = Standardizer::fit(val.x.view(), None);
    let xs = standardizer.transform(val.x.view());

    let impute = |i: usize, donors: &[usize]| -> f64 {
        // (distance, donor index), k smallest, ties broken by index
        let mut dist: Vec<(f64, usize)> = donors
            .iter()
            .map(|&j| {
                let d: f64 = xs
                    .row(i)
                    .iter()
                    .zip(xs.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (d, j)
            })
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        let nearest = &dist[..k];
        let exact: Vec<&(f64, usize)> = nearest.iter().filter(|(d, _)| *d == 0.0).collect();
        if !exact.is_empty() {
            return exact.iter().map(|(_, j)| val.yf[*j]).sum::<f64>() / exact.len() as f64;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for &(d, j) in nearest {
            let w = 1.0 / d;
            num += w * val.yf[j];
            den += w;
        }
        num / den
    };

    Ok((0..val.n())
        .map(|i| {
            if val.t[i] == 1 {
                val.yf[i] - impute(i, &control)
            } else {
                impute(i, &treated) - val.yf[i]
            }
        })
        .collect())
}

/// Scores candidate effects against the matched pseudo-truth.
pub fn tau_risk_match(
    tau_hat_val: &[f64],
    val: &DataView,
    k: usize,
    flavor: TauRiskFlavor,
) -> Result<MetricOutcome> {
    let tau_tilde = tau_match_truth(val, k)?;
    check_equal_lengths(tau_hat_val, &tau_tilde)?;
    let v = match flavor {
        TauRiskFlavor::Pehe => pehe(tau_hat_val, &tau_tilde)?,
        TauRiskFlavor::Ate => (mean(tau_hat_val) - mean(&tau_tilde)).abs(),
    };
    Ok(MetricOutcome::Value(v))
}
