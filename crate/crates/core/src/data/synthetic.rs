//! One- and two-object denoising tasks.
//!
//! A clean vector holds one or two non-overlapping runs of ones, each
//! `width / 8` long. The input copy additionally has every zero flipped to
//! one with probability `noise_p`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Batch, DataSource};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticTaskSpec {
    pub width: usize,
    pub objects: usize,
    pub object_length: usize,
    #[serde(default = "default_noise")]
    pub noise_p: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise() -> f64 {
    0.05
}

impl SyntheticTaskSpec {
    /// `objects` runs of length `width / 8`, noise 0.05.
    pub fn new(width: usize, objects: usize, seed: u64) -> Self {
        Self {
            width,
            objects,
            object_length: width / 8,
            noise_p: default_noise(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.object_length == 0 {
            return Err(Error::Config("width and object_length must be positive".into()));
        }
        if !(1..=2).contains(&self.objects) {
            return Err(Error::Config(format!("objects must be 1 or 2, got {}", self.objects)));
        }
        if self.object_length * self.objects > self.width {
            return Err(Error::Config(format!(
                "{} objects of length {} do not fit in width {}",
                self.objects, self.object_length, self.width
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(Error::Config(format!("noise_p must lie in [0, 1], got {}", self.noise_p)));
        }
        Ok(())
    }

    /// Number of valid start positions for one object.
    pub fn placements(&self) -> usize {
        self.width + 1 - self.object_length
    }
}

/// Seeded generator drawing fresh samples for every batch.
#[derive(Clone, Debug)]
pub struct SyntheticSource {
    spec: SyntheticTaskSpec,
    rng: ChaCha8Rng,
}

impl SyntheticSource {
    pub fn new(spec: SyntheticTaskSpec) -> Result<Self> {
        spec.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(spec.seed);
        Ok(Self { spec, rng })
    }

    /// As [`SyntheticSource::new`] but on an independent stream of the seed.
    pub fn with_stream(spec: SyntheticTaskSpec, stream: u64) -> Result<Self> {
        let mut s = Self::new(spec)?;
        s.rng.set_stream(stream);
        Ok(s)
    }

    pub fn spec(&self) -> &SyntheticTaskSpec {
        &self.spec
    }

    pub fn sample_one_object(&mut self, b: usize) -> Result<Batch> {
        if self.spec.objects != 1 {
            return Err(Error::Config("task is not a one-object task".into()));
        }
        self.sample(b)
    }

    pub fn sample_two_object(&mut self, b: usize) -> Result<Batch> {
        if self.spec.objects != 2 {
            return Err(Error::Config("task is not a two-object task".into()));
        }
        self.sample(b)
    }

    fn starts(&mut self) -> Vec<usize> {
        let (len, n) = (self.spec.object_length, self.spec.placements());
        if self.spec.objects == 1 {
            return vec![self.rng.random_range(0..n)];
        }
        // rejection over ordered pairs keeps the accepted pair uniform
        loop {
            let first = self.rng.random_range(0..n);
            let second = self.rng.random_range(0..n);
            if first + len <= second || second + len <= first {
                return vec![first, second];
            }
        }
    }

    fn sample(&mut self, b: usize) -> Result<Batch> {
        let w = self.spec.width;
        let len = self.spec.object_length;
        let mut targets = DMatrix::zeros(b, w);
        let mut inputs = DMatrix::zeros(b, w);
        for r in 0..b {
            for s in self.starts() {
                for c in s..s + len {
                    targets[(r, c)] = 1.0;
                }
            }
            for c in 0..w {
                let on = targets[(r, c)] == 1.0 || (self.spec.noise_p > 0.0 && self.rng.random_bool(self.spec.noise_p));
                inputs[(r, c)] = if on { 1.0 } else { 0.0 };
            }
        }
        Ok(Batch { inputs, targets })
    }
}

impl DataSource for SyntheticSource {
    fn width(&self) -> usize {
        self.spec.width
    }

    fn next_batch(&mut self, b: usize) -> Result<Batch> {
        self.sample(b)
    }
}
