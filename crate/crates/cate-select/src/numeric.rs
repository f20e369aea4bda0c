//! Small numerical building blocks: summary statistics, a dense Cholesky
//! solver for symmetric positive-definite systems, feature standardization,
//! and deterministic seed derivation for nested RNG streams.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population variance (divides by n).
pub fn variance_pop(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// Sample variance (divides by n − 1).
pub fn variance_sample(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub fn weighted_mean(v: &[f64], w: &[f64]) -> f64 {
    let sw: f64 = w.iter().sum();
    v.iter().zip(w).map(|(x, wi)| x * wi).sum::<f64>() / sw
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn clip(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Fails with `Error::Numerical` when a pivot is not strictly positive,
/// which signals the input was not positive definite.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("cholesky requires a square matrix"));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Numerical(format!(
                        "non-positive pivot {s:.3e} at index {i} during Cholesky factorization"
                    )));
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves A x = b given the lower Cholesky factor L of A.
pub fn cholesky_solve(l: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    debug_assert_eq!(b.len(), n);
    // forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    // backward: L' x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves the SPD system A x = b in one call.
pub fn solve_spd(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    Ok(cholesky_solve(&l, b))
}

/// Per-feature affine transform to zero mean / unit standard deviation,
/// with optional sample weights. Constant features keep scale 1 so the
/// transform stays invertible.
#[derive(Debug, Clone)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<'_, f64>, weights: Option<&[f64]>) -> Self {
        let n = x.nrows();
        let d = x.ncols();
        let uniform = vec![1.0; n];
        let w = weights.unwrap_or(&uniform);
        let sw: f64 = w.iter().sum();
        let mut means = vec![0.0; d];
        let mut scales = vec![1.0; d];
        for j in 0..d {
            let col = x.column(j);
            let m = col.iter().zip(w).map(|(v, wi)| v * wi).sum::<f64>() / sw;
            let var = col.iter().zip(w).map(|(v, wi)| wi * (v - m).powi(2)).sum::<f64>() / sw;
            means[j] = m;
            scales[j] = if var > 1e-24 { var.sqrt() } else { 1.0 };
        }
        Standardizer { means, scales }
    }

    pub fn identity(d: usize) -> Self {
        Standardizer { means: vec![0.0; d], scales: vec![1.0; d] }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for j in 0..self.means.len() {
            let (m, s) = (self.means[j], self.scales[j]);
            out.column_mut(j).mapv_inplace(|v| (v - m) / s);
        }
        out
    }

    pub fn transform_row(&self, row: ArrayView1<'_, f64>) -> Array1<f64> {
        Array1::from_iter(
            row.iter()
                .zip(self.means.iter().zip(&self.scales))
                .map(|(v, (m, s))| (v - m) / s),
        )
    }
}

/// 64-bit FNV-1a, used to fold string identifiers into seed material.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// SplitMix64 finalizer; decorrelates nearby seed inputs.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a base seed and a stream label.
pub fn child_seed(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(label.as_bytes()))
}

/// Derives an independent child RNG from a base seed and a stream label.
/// Same inputs always give the same stream, on every platform.
pub fn seeded_rng(seed: u64, stream: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(seed, stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = array![[4.0, 2.0], [2.0, 3.0]];
        let x = solve_spd(&a, &[8.0, 7.0]).unwrap();
        // A x = b with x = (5/4, 3/2)
        assert_abs_diff_eq!(x[0], 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_identity_kernel_halves_targets() {
        // (I + I) c = y  =>  c = y / 2
        let a = array![[2.0, 0.0], [0.0, 2.0]];
        let c = solve_spd(&a, &[3.0, -1.0]).unwrap();
        assert_abs_diff_eq!(c[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn standardizer_weighted_matches_duplication() {
        // one row duplicated with half weights == the row counted once
        let x2 = array![[1.0], [3.0], [3.0]];
        let w2 = [1.0, 0.5, 0.5];
        let x1 = array![[1.0], [3.0]];
        let a = Standardizer::fit(x2.view(), Some(&w2));
        let b = Standardizer::fit(x1.view(), None);
        assert_abs_diff_eq!(a.means[0], b.means[0], epsilon = 1e-12);
        assert_abs_diff_eq!(a.scales[0], b.scales[0], epsilon = 1e-12);
    }

    #[test]
    fn seeded_rng_is_reproducible() {
        use rand::Rng;
        let mut a = seeded_rng(42, "stream");
        let mut b = seeded_rng(42, "stream");
        let va: Vec<u32> = (0..4).map(|_| a.gen()).collect();
        let vb: Vec<u32> = (0..4).map(|_| b.gen()).collect();
        assert_eq!(va, vb);
        let mut c = seeded_rng(42, "other");
        let vc: Vec<u32> = (0..4).map(|_| c.gen()).collect();
        assert_ne!(va, vc);
    }
}
