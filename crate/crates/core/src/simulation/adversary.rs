use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::samples::SampleSet;
use crate::scalar::{norm2, Scalar};

/// Where an oracle-shift adversary aims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSource {
    /// Direction of the clean empirical mean relative to the reference center.
    CleanMean,
    Fixed(Vec<f64>),
}

/// How replaced rows are rewritten. Offsets are taken from the reference
/// center in [`ContaminationContext`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Every outlier at `center + magnitude · direction/‖direction‖`
    /// (first axis when `direction` is empty).
    PointMass {
        #[serde(default)]
        direction: Vec<f64>,
        magnitude: f64,
    },
    /// `center + factor · (X_i − center)`.
    ScaledCopies { factor: f64 },
    /// `center − (X_i − center)`.
    SignFlip,
    /// Every outlier at `center + magnitude · u`, `u` the unit vector from `source`.
    OracleShift { source: ShiftSource, magnitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub eta: f64,
    pub strategy: Strategy,
}

/// Side information available to the adversary.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContaminationContext {
    /// Reference point, usually the true mean; the origin when empty.
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contaminated<T> {
    pub samples: SampleSet<T>,
    /// Replaced row indices, ascending.
    pub replaced: Vec<usize>,
}

/// `⌊η n⌋`, robust to representation error in `η` (e.g. `0.29 · 100`).
pub fn corrupted_count(eta: f64, n: usize) -> usize {
    let x = eta * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * (1.0 + r) {
        r as usize
    } else {
        x.floor() as usize
    }
}

impl AdversarySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta < 0.5) {
            return Err(invalid(format!("eta must lie in [0, 1/2), got {}", self.eta)));
        }
        let finite = match &self.strategy {
            Strategy::PointMass { direction, magnitude } => {
                magnitude.is_finite() && direction.iter().all(|v| v.is_finite())
            }
            Strategy::ScaledCopies { factor } => factor.is_finite(),
            Strategy::SignFlip => true,
            Strategy::OracleShift { source, magnitude } => {
                magnitude.is_finite()
                    && match source {
                        ShiftSource::Fixed(v) => v.iter().all(|x| x.is_finite()),
                        ShiftSource::CleanMean => true,
                    }
            }
        };
        if finite {
            Ok(())
        } else {
            Err(invalid("adversary parameters must be finite"))
        }
    }
}

fn unit_or_axis(v: &[f64], d: usize) -> Vec<f64> {
    let nrm = norm2(v);
    if v.len() == d && nrm > 0.0 {
        v.iter().map(|x| x / nrm).collect()
    } else {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        e
    }
}

/// Replaces exactly `⌊η n⌋` rows chosen uniformly at random (seeded).
pub fn contaminate<T: Scalar>(
    samples: &SampleSet<T>,
    adv: &AdversarySpec,
    ctx: &ContaminationContext,
    seed: u64,
) -> Result<Contaminated<T>> {
    adv.validate()?;
    let (n, d) = (samples.n(), samples.d());
    let center = if ctx.center.is_empty() {
        vec![0.0; d]
    } else {
        check_dim(d, ctx.center.len())?;
        ctx.center.clone()
    };
    let aim = |dir: &[f64], magnitude: f64| -> Result<Vec<f64>> {
        if !dir.is_empty() {
            check_dim(d, dir.len())?;
        }
        let u = unit_or_axis(dir, d);
        Ok(center.iter().zip(&u).map(|(c, u)| c + magnitude * u).collect())
    };
    let fixed = match &adv.strategy {
        Strategy::PointMass { direction, magnitude } => Some(aim(direction, *magnitude)?),
        Strategy::OracleShift { source, magnitude } => {
            let dir = match source {
                ShiftSource::Fixed(v) => v.clone(),
                ShiftSource::CleanMean => samples
                    .mean()
                    .iter()
                    .zip(&center)
                    .map(|(m, c)| m.to_f64_lossy() - c)
                    .collect(),
            };
            Some(aim(&dir, *magnitude)?)
        }
        _ => None,
    };

    let m = corrupted_count(adv.eta, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut replaced = rand::seq::index::sample(&mut rng, n, m).into_vec();
    replaced.sort_unstable();

    let mut out = samples.clone();
    let mut row = vec![T::zero(); d];
    for &i in &replaced {
        let x = samples.row(i);
        for k in 0..d {
            let c = center[k];
            let v = match (&adv.strategy, &fixed) {
                (_, Some(p)) => p[k],
                (Strategy::ScaledCopies { factor }, None) => c + factor * (x[k].to_f64_lossy() - c),
                (_, None) => 2.0 * c - x[k].to_f64_lossy(),
            };
            row[k] = T::lit(v);
        }
        out.set_row(i, &row);
    }
    Ok(Contaminated { samples: out, replaced })
}
