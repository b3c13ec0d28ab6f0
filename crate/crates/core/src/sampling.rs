use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::manifold::Chart;
use crate::numdiff::{DiffConfig, Point};

/// Seeded recipe for interior sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    /// Minimum coordinate distance kept from the domain boundary.
    pub margin: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self::for_config(0, 20, &DiffConfig::default())
    }
}

const MAX_ATTEMPTS_PER_POINT: usize = 10_000;
pub const MIN_MARGIN: f64 = 0.01;

impl SamplePlan {
    /// Plan whose margin is four stencil steps, and at least [`MIN_MARGIN`] so
    /// that plans for nearby steps draw the same points.
    pub fn for_config(seed: u64, count: usize, cfg: &DiffConfig) -> Self {
        Self {
            seed,
            count,
            margin: (4.0 * cfg.step).max(MIN_MARGIN),
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_count(self, count: usize) -> Self {
        Self { count, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(GeoError::InvalidConfig("sample count must be positive".into()));
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err(GeoError::InvalidConfig(format!("margin must be > 0, got {}", self.margin)));
        }
        Ok(())
    }

    /// Draws `count` points uniformly from the chart's sample box, rejecting
    /// any point whose `margin`-cross along every axis leaves the domain.
    pub fn points(&self, chart: &Chart) -> Result<Vec<Point>> {
        self.validate()?;
        // mix the chart name in so that different charts get different streams
        let salt = chart
            .name
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt);
        let mut out = Vec::with_capacity(self.count);
        let mut attempts = 0usize;
        while out.len() < self.count {
            attempts += 1;
            if attempts > MAX_ATTEMPTS_PER_POINT * self.count {
                return Err(GeoError::InvalidConfig(format!(
                    "could not place {} samples at margin {} inside chart `{}`",
                    self.count, self.margin, chart.name
                )));
            }
            let x = DVector::from_iterator(
                chart.dim,
                chart.sample_box.iter().map(|&(lo, hi)| {
                    let (lo, hi) = (lo + self.margin, hi - self.margin);
                    if hi > lo {
                        rng.gen_range(lo..hi)
                    } else {
                        0.5 * (lo + hi)
                    }
                }),
            );
            if self.keeps_margin(chart, &x) {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Whether `x` and its `margin`-cross along every axis lie in the domain.
    pub fn keeps_margin(&self, chart: &Chart, x: &Point) -> bool {
        if !chart.domain.contains(x) {
            return false;
        }
        (0..chart.dim).all(|i| {
            [-self.margin, self.margin].iter().all(|&delta| {
                let mut y = x.clone();
                y[i] += delta;
                chart.domain.contains(&y)
            })
        })
    }
}
