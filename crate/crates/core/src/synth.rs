//! Synthetic series with known scaling: fractional Gaussian noise, white
//! Gaussian noise and exact power-law fixtures.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (identifier
//! [`RNG_ALGORITHM`]), so every draw is replayable from its seed. Batches use
//! [`derive_seed`] to give each member its own stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::ScalingPoint;

pub const RNG_ALGORITHM: &str = "chacha8-seed_from_u64";

/// Relative tolerance below which negative embedding eigenvalues are
/// treated as rounding and clamped to zero.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("Hurst exponent {0} outside (0, 1)")]
    HurstOutOfRange(f64),
    #[error("length {0} below the minimum")]
    TooShort(usize),
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("circulant embedding has eigenvalue {min} (max {max})")]
    NegativeEigenvalue { min: f64, max: f64 },
    #[error("covariance is not positive definite at step {0}")]
    NotPositiveDefinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgnSpec {
    pub h: f64,
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl FgnSpec {
    pub fn new(h: f64, n: usize, sigma: f64, seed: u64) -> Result<Self, SynthError> {
        let spec = Self { h, n, sigma, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(SynthError::HurstOutOfRange(self.h));
        }
        if self.n < 2 {
            return Err(SynthError::TooShort(self.n));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(SynthError::BadSigma(self.sigma));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FgnMethod {
    /// Davies-Harte circulant embedding, O(n log n).
    Circulant,
    /// Sequential conditional Gaussian draws (Durbin-Levinson), O(n²).
    Conditional,
}

/// Autocovariance of fGn at lag `k`:
/// `σ²/2 · (|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn fgn_autocovariance(h: f64, sigma: f64, k: usize) -> f64 {
    let two_h = 2.0 * h;
    let k = k as f64;
    0.5 * sigma
        * sigma
        * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// SplitMix64 finalizer applied to `base + index · φ`; member `index` of a
/// batch seeded with `base` uses this seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// fGn by circulant embedding, falling back to the conditional construction
/// when the embedding is not non-negative definite.
pub fn generate_fgn(spec: &FgnSpec) -> Result<Vec<f64>, SynthError> {
    match generate_fgn_with(spec, FgnMethod::Circulant) {
        Err(SynthError::NegativeEigenvalue { .. }) => {
            generate_fgn_with(spec, FgnMethod::Conditional)
        }
        other => other,
    }
}

pub fn generate_fgn_with(spec: &FgnSpec, method: FgnMethod) -> Result<Vec<f64>, SynthError> {
    spec.validate()?;
    let gamma: Vec<f64> = (0..=spec.n)
        .map(|k| fgn_autocovariance(spec.h, spec.sigma, k))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match method {
        FgnMethod::Circulant => circulant(&gamma, spec.n, &mut rng),
        FgnMethod::Conditional => conditional(&gamma, spec.n, &mut rng),
    }
}

fn circulant(gamma: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, SynthError> {
    let size = 2 * n;
    // first row of the circulant: γ0 … γn, γ(n−1) … γ1
    let mut row: Vec<Complex64> = (0..size)
        .map(|j| {
            let lag = if j <= n { j } else { size - j };
            Complex64::new(gamma[lag], 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);
    let mut eigen: Vec<f64> = row.iter().map(|c| c.re).collect();
    let max = eigen.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigen.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -EIGEN_TOLERANCE * max {
        return Err(SynthError::NegativeEigenvalue { min, max });
    }
    eigen.iter_mut().for_each(|l| *l = l.max(0.0));

    let m = size as f64;
    let mut w = vec![Complex64::new(0.0, 0.0); size];
    w[0] = Complex64::new((eigen[0] / m).sqrt() * normal(rng), 0.0);
    w[n] = Complex64::new((eigen[n] / m).sqrt() * normal(rng), 0.0);
    for k in 1..n {
        let s = (eigen[k] / (2.0 * m)).sqrt();
        let z = Complex64::new(s * normal(rng), s * normal(rng));
        w[k] = z;
        w[size - k] = z.conj();
    }
    fft.process(&mut w);
    Ok(w.iter().take(n).map(|c| c.re).collect())
}

fn conditional(gamma: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, SynthError> {
    // Durbin-Levinson: x_t | x_{t-1..0} ~ N(Σ φ_{t,j} x_{t-j}, v_t)
    let mut out = Vec::with_capacity(n);
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut prev: Vec<f64> = Vec::with_capacity(n);
    let mut v = gamma[0];
    if v <= 0.0 {
        return Err(SynthError::NotPositiveDefinite(0));
    }
    out.push(v.sqrt() * normal(rng));
    for t in 1..n {
        // update partial autocorrelation
        let mut acc = gamma[t];
        for j in 1..t {
            acc -= prev[j - 1] * gamma[t - j];
        }
        let kappa = acc / v;
        phi.clear();
        for j in 1..t {
            phi.push(prev[j - 1] - kappa * prev[t - j - 1]);
        }
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
        if v <= 0.0 {
            return Err(SynthError::NotPositiveDefinite(t));
        }
        let mean: f64 = phi
            .iter()
            .enumerate()
            .map(|(j, p)| p * out[t - 1 - j])
            .sum();
        out.push(mean + v.sqrt() * normal(rng));
        std::mem::swap(&mut phi, &mut prev);
    }
    Ok(out)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// i.i.d. `N(0, σ²)` draws.
pub fn generate_gaussian(n: usize, sigma: f64, seed: u64) -> Result<Vec<f64>, SynthError> {
    if n < 1 {
        return Err(SynthError::TooShort(n));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SynthError::BadSigma(sigma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| sigma * normal(&mut rng)).collect())
}

/// Points `(m, m^h)` for each size.
pub fn powerlaw_fixture(h: f64, sizes: &[usize]) -> Vec<ScalingPoint> {
    sizes
        .iter()
        .map(|&size| ScalingPoint {
            size,
            value: (size as f64).powf(h),
        })
        .collect()
}
