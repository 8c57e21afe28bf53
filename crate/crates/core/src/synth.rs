//! Seeded synthetic streams used for tests and desk-scale experiments.
//!
//! - `separable`: label ~ Bernoulli(1/2); `x0` ~ U(0.1, 1) for class 1 and
//!   U(-1, -0.1) for class 0; `x1..x3` ~ U(-1, 1) noise. Bayes accuracy 1.
//! - `gaussian-mix`: label ~ Bernoulli(1/2); `x0` ~ N(±0.5, 0.15²) by class;
//!   `x1` ~ N(0, 0.3²) noise. The Bayes rule is `x0 > 0`.
//! - `uniform-noise`: four U(-1, 1) attributes and an independent fair label.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{AttributeSchema, DatasetSchema, Sample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Separable,
    GaussianMix,
    UniformNoise,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separable" => Ok(SynthKind::Separable),
            "gaussian-mix" => Ok(SynthKind::GaussianMix),
            "uniform-noise" => Ok(SynthKind::UniformNoise),
            other => Err(Error::Config(format!(
                "unknown synthetic kind '{other}' (separable | gaussian-mix | uniform-noise)"
            ))),
        }
    }
}

pub const MIX_MEAN: f64 = 0.5;
pub const MIX_SIGMA: f64 = 0.15;

pub fn schema_for(kind: SynthKind) -> DatasetSchema {
    let count = match kind {
        SynthKind::GaussianMix => 2,
        SynthKind::Separable | SynthKind::UniformNoise => 4,
    };
    let attrs = (0..count).map(|i| AttributeSchema::numeric(format!("x{i}"))).collect();
    DatasetSchema::new(attrs, 2).expect("static schema is valid")
}

pub fn gen_synthetic(kind: SynthKind, n: usize, seed: u64) -> Result<(DatasetSchema, Vec<Sample>)> {
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    let hi = Normal::new(MIX_MEAN, MIX_SIGMA).expect("finite");
    let lo = Normal::new(-MIX_MEAN, MIX_SIGMA).expect("finite");
    let noise = Normal::new(0.0, 0.3).expect("finite");
    for _ in 0..n {
        let label: u32 = rng.random_range(0..2);
        let numeric = match kind {
            SynthKind::Separable => {
                let x0 = if label == 1 {
                    rng.random_range(0.1..1.0)
                } else {
                    rng.random_range(-1.0..-0.1)
                };
                let mut v = vec![x0];
                v.extend((0..3).map(|_| rng.random_range(-1.0..1.0)));
                v
            }
            SynthKind::GaussianMix => {
                let x0 = if label == 1 { hi.sample(&mut rng) } else { lo.sample(&mut rng) };
                vec![x0, noise.sample(&mut rng)]
            }
            SynthKind::UniformNoise => (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        samples.push(Sample::new(numeric, vec![], label));
    }
    Ok((schema_for(kind), samples))
}
