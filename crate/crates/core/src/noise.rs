//! Prediction error models and keyed random streams.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::query_pred::AnswerBits;
use crate::time_pred::{ErrorSign, SignedError, TimePrediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    TruncatedNormal,
    Uniform,
}

impl NoiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::TruncatedNormal => "truncated-normal",
            NoiseKind::Uniform => "uniform",
        }
    }
}

/// Relative noise on the predicted interruption: `tau = T (1 + delta)` with
/// `|delta| <= H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeNoiseModel {
    kind: NoiseKind,
    error_bound: f64,
    sigma: f64,
}

impl TimeNoiseModel {
    /// Normal noise with relative deviation `sigma` (default `H / 2`),
    /// rejection-truncated to `[-H, H]`.
    pub fn truncated_normal(error_bound: f64, sigma: Option<f64>) -> Result<Self> {
        check_bound(error_bound)?;
        let sigma = sigma.unwrap_or(error_bound / 2.0);
        if !(sigma.is_finite() && sigma > 0.0) && error_bound > 0.0 {
            return Err(domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            kind: NoiseKind::TruncatedNormal,
            error_bound,
            sigma,
        })
    }

    pub fn uniform(error_bound: f64) -> Result<Self> {
        check_bound(error_bound)?;
        Ok(Self {
            kind: NoiseKind::Uniform,
            error_bound,
            sigma: 0.0,
        })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Draws `delta` in `[-H, H]`.
    pub fn sample_delta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let h = self.error_bound;
        if h == 0.0 {
            return 0.0;
        }
        match self.kind {
            NoiseKind::Uniform => rng.random_range(-h..=h),
            NoiseKind::TruncatedNormal => {
                let normal = Normal::new(0.0, self.sigma).expect("sigma validated");
                loop {
                    let d: f64 = normal.sample(rng);
                    if d.abs() <= h {
                        return d;
                    }
                }
            }
        }
    }
}

fn check_bound(h: f64) -> Result<()> {
    if (0.0..1.0).contains(&h) {
        Ok(())
    } else {
        Err(domain(format!("error bound H must lie in [0, 1), got {h}")))
    }
}

/// A deterministic random stream addressed by `(seed, grid key, trial)`.
///
/// Distinct keys give independent ChaCha streams, so trials can be
/// evaluated in any order or in parallel with identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub grid_key: u64,
    pub trial: u64,
}

impl RngStream {
    pub fn new(seed: u64, grid_key: u64, trial: u64) -> Self {
        Self {
            seed,
            grid_key,
            trial,
        }
    }

    /// Stream keyed by the bit pattern of an interruption time, so a grid
    /// point keeps its samples when other points are added or removed.
    pub fn for_point(seed: u64, t: f64, trial: u64) -> Self {
        Self::new(seed, t.to_bits(), trial)
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.grid_key.to_le_bytes());
        key[16..24].copy_from_slice(&self.trial.to_le_bytes());
        key[24..].copy_from_slice(b"predschd");
        ChaCha12Rng::from_seed(key)
    }
}

/// Draws a noisy prediction `tau = T (1 + delta)` for the true interruption `t`.
pub fn sample_tau<R: Rng + ?Sized>(
    t: f64,
    model: &TimeNoiseModel,
    rng: &mut R,
) -> Result<TimePrediction> {
    let h = model.error_bound();
    if !(t.is_finite() && t * (1.0 - h) >= 1.0) {
        return Err(domain(format!(
            "interruption {t} too small for error bound {h}: need T >= 1/(1-H)"
        )));
    }
    let delta = model.sample_delta(rng);
    TimePrediction::new(t * (1.0 + delta), Some(h))
}

/// Signed relative error of prediction `tau` for the interruption `t`.
pub fn error_of(tau: f64, t: f64) -> SignedError {
    if t > tau {
        SignedError {
            eta: t / tau - 1.0,
            sign: ErrorSign::Positive,
        }
    } else if t < tau {
        SignedError {
            eta: 1.0 - t / tau,
            sign: ErrorSign::Negative,
        }
    } else {
        SignedError::zero()
    }
}

/// Number of corrupted answers for an error fraction `eta` on `n` bits,
/// `floor(eta n)`.
pub fn flip_count(eta: f64, n: usize) -> usize {
    // 1e-9 absorbs representation error such as 0.29 * 100 = 28.999...
    ((eta * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Flips exactly `floor(eta n)` distinct, uniformly chosen answers.
pub fn flip_bits<R: Rng + ?Sized>(bits: &AnswerBits, eta: f64, rng: &mut R) -> Result<AnswerBits> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(domain(format!("eta must lie in [0, 1], got {eta}")));
    }
    let n = bits.len();
    let k = flip_count(eta, n);
    let mut out = bits.bits().to_vec();
    for pos in index::sample(rng, n, k) {
        out[pos] = !out[pos];
    }
    Ok(AnswerBits::with_flips(out, k))
}
