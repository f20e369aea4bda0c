//! Synthetic data generators used by the test pipeline and the
//! model-selection demonstration.

use super::{Dataset, OutcomeKind};
use crate::error::{Error, Result};
use crate::numeric::{seeded_rng, sigmoid};
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

/// Constants of the sinusoidal two-arm generator. These are configuration
/// defaults, not calibrated values; the demonstration only relies on the
/// qualitative shape (per-arm sinusoidal means, constant arm offset,
/// systematically missing treated units inside a band).
#[derive(Debug, Clone)]
pub struct SinusoidalConfig {
    pub x_range: (f64, f64),
    pub arm_offset: f64,
}

impl Default for SinusoidalConfig {
    fn default() -> Self {
        SinusoidalConfig { x_range: (-4.0, 4.0), arm_offset: 1.0 }
    }
}

/// One-dimensional generator whose mean outcome is sinusoidal per arm with a
/// constant arm offset. Treated units whose covariate falls inside
/// `missing_band` are removed, simulating systematically missing treated
/// data. Noiseless means and counterfactuals are always populated.
pub fn gen_sinusoidal_demo(
    n_control: usize,
    n_treated: usize,
    missing_band: Option<(f64, f64)>,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    gen_sinusoidal_with(n_control, n_treated, missing_band, noise_sd, seed, &SinusoidalConfig::default())
}

pub fn gen_sinusoidal_with(
    n_control: usize,
    n_treated: usize,
    missing_band: Option<(f64, f64)>,
    noise_sd: f64,
    seed: u64,
    cfg: &SinusoidalConfig,
) -> Result<Dataset> {
    if n_control == 0 || n_treated == 0 {
        return Err(Error::invalid("arm counts must be positive"));
    }
    if noise_sd < 0.0 {
        return Err(Error::invalid("noise_sd must be nonnegative"));
    }
    if let Some((lo, hi)) = missing_band {
        if lo > hi {
            return Err(Error::invalid("missing_band lower bound exceeds upper bound"));
        }
    }
    let mut rng = seeded_rng(seed, "sinusoidal-demo");
    let unif = Uniform::new_inclusive(cfg.x_range.0, cfg.x_range.1);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let in_band = |x: f64| matches!(missing_band, Some((lo, hi)) if x >= lo && x <= hi);

    let mut xs: Vec<f64> = Vec::with_capacity(n_control + n_treated);
    let mut ts: Vec<u8> = Vec::with_capacity(n_control + n_treated);
    for _ in 0..n_control {
        xs.push(unif.sample(&mut rng));
        ts.push(0);
    }
    let mut kept_treated = 0usize;
    for _ in 0..n_treated {
        let x = unif.sample(&mut rng);
        if !in_band(x) {
            xs.push(x);
            ts.push(1);
            kept_treated += 1;
        }
    }
    if kept_treated == 0 {
        return Err(Error::invalid("empty arm: missing band removed every treated unit"));
    }

    let n = xs.len();
    let mu0: Vec<f64> = xs.iter().map(|&x| x.sin()).collect();
    let mu1: Vec<f64> = mu0.iter().map(|m| m + cfg.arm_offset).collect();
    let mut yf = Vec::with_capacity(n);
    let mut ycf = Vec::with_capacity(n);
    for i in 0..n {
        let e_f = noise_sd * normal.sample(&mut rng);
        let e_cf = noise_sd * normal.sample(&mut rng);
        if ts[i] == 1 {
            yf.push(mu1[i] + e_f);
            ycf.push(mu0[i] + e_cf);
        } else {
            yf.push(mu0[i] + e_f);
            ycf.push(mu1[i] + e_cf);
        }
    }

    let x = Array2::from_shape_vec((n, 1), xs).expect("n×1 covariate buffer");
    Dataset::new(x, ts, yf, Some(ycf), Some(mu0), Some(mu1), None, OutcomeKind::Continuous)
}

/// Partially linear generator: `Y = theta·T + g(X) + ε` with a
/// logistic-in-X propensity scaled by `confounding`, `g` linear in the
/// equally-weighted covariate index, and a constant effect everywhere
/// (`mu1 − mu0 = theta`). The same index drives both the propensity and the
/// baseline, so nonzero `confounding` biases naive difference-in-means.
pub fn gen_partially_linear(
    n: usize,
    d: usize,
    theta: f64,
    confounding: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if n <= d {
        return Err(Error::invalid(format!("need n > d (got n={n}, d={d})")));
    }
    if noise_sd < 0.0 {
        return Err(Error::invalid("noise_sd must be nonnegative"));
    }
    let mut rng = seeded_rng(seed, "partially-linear");
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut x = Array2::<f64>::zeros((n, d));
    for v in x.iter_mut() {
        *v = normal.sample(&mut rng);
    }
    let scale = (d as f64).sqrt();
    let index: Vec<f64> = x.rows().into_iter().map(|r| r.sum() / scale).collect();

    let mut t = Vec::with_capacity(n);
    for &s in &index {
        let e = sigmoid(confounding * s);
        t.push(u8::from(rng.gen::<f64>() < e));
    }
    // Degenerate draws are possible at extreme confounding; refuse rather
    // than emit an invalid dataset.
    let n1: usize = t.iter().map(|&v| v as usize).sum();
    if n1 == 0 || n1 == n {
        return Err(Error::invalid("generated sample has an empty treatment arm"));
    }

    let g = &index;
    let mu0: Vec<f64> = g.clone();
    let mu1: Vec<f64> = g.iter().map(|v| v + theta).collect();
    let mut yf = Vec::with_capacity(n);
    let mut ycf = Vec::with_capacity(n);
    for i in 0..n {
        let e_f = noise_sd * normal.sample(&mut rng);
        let e_cf = noise_sd * normal.sample(&mut rng);
        if t[i] == 1 {
            yf.push(mu1[i] + e_f);
            ycf.push(mu0[i] + e_cf);
        } else {
            yf.push(mu0[i] + e_f);
            ycf.push(mu1[i] + e_cf);
        }
    }

    Dataset::new(x, t, yf, Some(ycf), Some(mu0), Some(mu1), None, OutcomeKind::Continuous)
}
