//! Temporal distributions and seeded random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::time::SimTime;

/// A reproducible random stream.
///
/// Every stochastic process owns its own stream, derived from the run seed
/// and a stable label, so adding a process never shifts another's draws.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for `(seed, label)`.
    pub fn substream(seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        RandomStream {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Exponential with the given mean, by inversion. Always positive.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        let u = self.uniform();
        -mean * (1.0 - u).ln()
    }

    /// Uniform index in `0..n`. Panics when `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistributionError {
    #[error("{field} must be {requirement}, got {value}")]
    OutOfRange {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("distribution '{kind}' requires field '{field}'")]
    MissingField { kind: String, field: &'static str },
    #[error("unknown distribution type '{0}'")]
    UnknownKind(String),
}

/// Inter-event time law for sources, policy ticks and custom processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub enum TemporalDistribution {
    Deterministic { period: f64 },
    DeterministicStart { start: f64, period: f64 },
    Exponential { mean: f64 },
    ExponentialStart { start: f64, mean: f64 },
}

impl TemporalDistribution {
    pub fn deterministic(period: f64) -> Self {
        TemporalDistribution::Deterministic { period }
    }

    pub fn deterministic_start(start: f64, period: f64) -> Self {
        TemporalDistribution::DeterministicStart { start, period }
    }

    pub fn exponential(mean: f64) -> Self {
        TemporalDistribution::Exponential { mean }
    }

    pub fn exponential_start(start: f64, mean: f64) -> Self {
        TemporalDistribution::ExponentialStart { start, mean }
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        fn positive(field: &'static str, value: f64) -> Result<(), DistributionError> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(DistributionError::OutOfRange {
                    field,
                    requirement: "finite and > 0",
                    value,
                })
            }
        }
        fn non_negative(field: &'static str, value: f64) -> Result<(), DistributionError> {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(DistributionError::OutOfRange {
                    field,
                    requirement: "finite and >= 0",
                    value,
                })
            }
        }
        match *self {
            TemporalDistribution::Deterministic { period } => positive("time", period),
            TemporalDistribution::DeterministicStart { start, period } => {
                non_negative("start", start)?;
                positive("time", period)
            }
            TemporalDistribution::Exponential { mean } => positive("mean", mean),
            TemporalDistribution::ExponentialStart { start, mean } => {
                non_negative("start", start)?;
                positive("mean", mean)
            }
        }
    }

    /// Delay until the next firing. `is_first` selects the start offset for
    /// the `*Start` kinds. Only a zero deterministic start yields zero.
    pub fn next_interval(&self, rng: &mut RandomStream, is_first: bool) -> SimTime {
        let units = match *self {
            TemporalDistribution::Deterministic { period } => period,
            TemporalDistribution::DeterministicStart { start, period } => {
                if is_first {
                    return SimTime::from_units(start);
                }
                period
            }
            TemporalDistribution::Exponential { mean } => rng.exponential(mean),
            TemporalDistribution::ExponentialStart { start, mean } => {
                if is_first {
                    start + rng.exponential(mean)
                } else {
                    rng.exponential(mean)
                }
            }
        };
        SimTime::from_units(units).max(SimTime::from_ticks(1))
    }

    /// True for kinds that consume random draws.
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            TemporalDistribution::Exponential { .. }
                | TemporalDistribution::ExponentialStart { .. }
        )
    }
}

/// JSON form: `{"type": ..., "time": .., "start": .., "mean": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
}

impl TryFrom<DistributionSpec> for TemporalDistribution {
    type Error = DistributionError;

    fn try_from(spec: DistributionSpec) -> Result<Self, Self::Error> {
        let need = |field: &'static str, v: Option<f64>| {
            v.ok_or_else(|| DistributionError::MissingField {
                kind: spec.kind.clone(),
                field,
            })
        };
        let dist = match spec.kind.as_str() {
            "deterministic" => TemporalDistribution::Deterministic {
                period: need("time", spec.time)?,
            },
            "deterministic_start" => TemporalDistribution::DeterministicStart {
                start: need("start", spec.start)?,
                period: need("time", spec.time)?,
            },
            "exponential" => match spec.start {
                Some(start) => TemporalDistribution::ExponentialStart {
                    start,
                    mean: need("mean", spec.mean)?,
                },
                None => TemporalDistribution::Exponential {
                    mean: need("mean", spec.mean)?,
                },
            },
            "exponential_start" => TemporalDistribution::ExponentialStart {
                start: need("start", spec.start)?,
                mean: need("mean", spec.mean)?,
            },
            other => return Err(DistributionError::UnknownKind(other.to_string())),
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl From<TemporalDistribution> for DistributionSpec {
    fn from(d: TemporalDistribution) -> Self {
        let spec = |kind: &str, time, start, mean| DistributionSpec {
            kind: kind.to_string(),
            time,
            start,
            mean,
        };
        match d {
            TemporalDistribution::Deterministic { period } => {
                spec("deterministic", Some(period), None, None)
            }
            TemporalDistribution::DeterministicStart { start, period } => {
                spec("deterministic_start", Some(period), Some(start), None)
            }
            TemporalDistribution::Exponential { mean } => {
                spec("exponential", None, None, Some(mean))
            }
            TemporalDistribution::ExponentialStart { start, mean } => {
                spec("exponential", None, Some(start), Some(mean))
            }
        }
    }
}
