//! Seeded synthetic score distributions.
//!
//! Similarities are drawn from per-class Gaussians with a ChaCha20 stream
//! (`ChaCha20Rng::seed_from_u64`) and Box-Muller transforms evaluated with
//! `libm`, so a given seed yields the same bytes on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::measure::{Dataset, Label, PairRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_pos: usize,
    pub n_neg: usize,
    pub pos_mean: f64,
    pub pos_sd: f64,
    pub neg_mean: f64,
    pub neg_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(
        n_pos: usize,
        n_neg: usize,
        (pos_mean, pos_sd): (f64, f64),
        (neg_mean, neg_sd): (f64, f64),
        seed: u64,
    ) -> Result<Self> {
        let spec = SyntheticSpec {
            n_pos,
            n_neg,
            pos_mean,
            pos_sd,
            neg_mean,
            neg_sd,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CalibError::InvalidArgument(m));
        if self.n_pos == 0 || self.n_neg == 0 {
            return bad("synthetic data needs at least one pair of each class".into());
        }
        for (name, sd) in [("pos_sd", self.pos_sd), ("neg_sd", self.neg_sd)] {
            if !(sd > 0.0 && sd.is_finite()) {
                return bad(format!("{name} must be positive, got {sd}"));
            }
        }
        for (name, m) in [("pos_mean", self.pos_mean), ("neg_mean", self.neg_mean)] {
            if !m.is_finite() {
                return bad(format!("{name} must be finite, got {m}"));
            }
        }
        Ok(())
    }
}

fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    // 1 - u keeps the log argument in (0, 1]
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
}

/// Positives first, then negatives, each clamped to `[-1, 1]`.
pub fn generate(spec: &SyntheticSpec) -> Result<Dataset<f64>> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.n_pos + spec.n_neg);
    let classes = [
        (Label::Positive, spec.n_pos, spec.pos_mean, spec.pos_sd),
        (Label::Negative, spec.n_neg, spec.neg_mean, spec.neg_sd),
    ];
    for (label, n, mean, sd) in classes {
        for _ in 0..n {
            let s = (mean + sd * standard_normal(&mut rng)).clamp(-1.0, 1.0);
            records.push(PairRecord {
                similarity: s,
                label,
            });
        }
    }
    Ok(Dataset::new(records))
}
