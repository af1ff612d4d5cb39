//! Finite-shot measurement records.
//!
//! Each time point is an independent binomial experiment. Random streams
//! come from ChaCha20 seeded with the run seed, one stream per point index,
//! so any point can be regenerated alone and parallel sampling is
//! reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Generator name recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9), stream = point index";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShotsError {
    #[error("probability {value} at point {index} lies outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("phase distribution must be symmetric about zero: {0}")]
    Asymmetric(String),
    #[error("invalid distribution width {0}")]
    InvalidWidth(f64),
}

/// Shots per point; `Infinite` marks a noiseless trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shots {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    /// µs
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub shots: Shots,
    pub seed: u64,
}

impl SignalTrace {
    /// A noiseless trace: zero error bars, infinite shots.
    pub fn noiseless(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ShotsError> {
        if times.len() != values.len() {
            return Err(ShotsError::LengthMismatch { times: times.len(), values: values.len() });
        }
        let stderr = vec![0.0; values.len()];
        Ok(Self { times, values, stderr, shots: Shots::Infinite, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_noiseless(&self) -> bool {
        self.shots == Shots::Infinite
    }

    /// `t_us,p0,p0_stderr` records.
    pub fn to_table(&self) -> String {
        crate::table::csv(
            &["t_us", "p0", "p0_stderr"],
            (0..self.len()).map(|i| vec![self.times[i], self.values[i], self.stderr[i]]),
        )
    }
}

/// Replace every point of `clean` by `k/N` with `k ~ Binomial(N, P0)`.
/// Error bars are `sqrt(v(1−v)/N)` with `v` kept at least `1/(2N)` away from
/// 0 and 1 so that no point gets infinite weight.
pub fn sample_trace(clean: &SignalTrace, shots: u64, seed: u64) -> Result<SignalTrace, ShotsError> {
    if shots == 0 {
        return Err(ShotsError::ZeroShots);
    }
    if clean.times.len() != clean.values.len() {
        return Err(ShotsError::LengthMismatch { times: clean.times.len(), values: clean.values.len() });
    }
    let n = shots as f64;
    let floor = 0.5 / n;
    let mut values = Vec::with_capacity(clean.len());
    let mut stderr = Vec::with_capacity(clean.len());
    for (i, &p) in clean.values.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(ShotsError::ProbabilityOutOfRange { index: i, value: p });
        }
        let mut rng = point_rng(seed, i as u64);
        let k = Binomial::new(shots, p).map_err(|_| ShotsError::ProbabilityOutOfRange { index: i, value: p })?;
        let v = k.sample(&mut rng) as f64 / n;
        let w = v.clamp(floor, 1.0 - floor);
        values.push(v);
        stderr.push((w * (1.0 - w) / n).sqrt());
    }
    Ok(SignalTrace { times: clean.times.clone(), values, stderr, shots: Shots::Finite(shots), seed })
}

fn point_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Zero-centred distribution of quasi-static phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhaseDistribution {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
}

pub fn draw_quasi_static_phases(count: usize, dist: PhaseDistribution, seed: u64) -> Result<Vec<f64>, ShotsError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    match dist {
        PhaseDistribution::Uniform { low, high } => {
            if !(low.is_finite() && high.is_finite()) || high < low {
                return Err(ShotsError::InvalidWidth(high - low));
            }
            if low != -high {
                return Err(ShotsError::Asymmetric(format!("uniform on [{low}, {high}]")));
            }
            if high == 0.0 {
                return Ok(vec![0.0; count]);
            }
            let u = Uniform::new(low, high).map_err(|_| ShotsError::InvalidWidth(high - low))?;
            Ok((0..count).map(|_| u.sample(&mut rng)).collect())
        }
        PhaseDistribution::Normal { mean, std } => {
            if mean != 0.0 {
                return Err(ShotsError::Asymmetric(format!("normal with mean {mean}")));
            }
            if !(std.is_finite() && std >= 0.0) {
                return Err(ShotsError::InvalidWidth(std));
            }
            if std == 0.0 {
                return Ok(vec![0.0; count]);
            }
            let d = Normal::new(0.0, std).map_err(|_| ShotsError::InvalidWidth(std))?;
            Ok((0..count).map(|_| d.sample(&mut rng)).collect())
        }
    }
}
