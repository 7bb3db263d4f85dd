//! Model parameters and the sphere-of-influence volume law.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpaError};
use crate::geometry::{radius_for_volume, NormChoice};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Link probability.
    pub p: f64,
    /// Degree coefficient of the sphere volume.
    pub a1: f64,
    /// Volume offset.
    pub a2: f64,
    pub dimension: usize,
    pub norm: NormChoice,
    /// Final number of vertices.
    pub n: usize,
    pub seed: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            p: 0.7,
            a1: 1.0,
            a2: a2_for_mean_degree(0.7, 10.0),
            dimension: 2,
            norm: NormChoice::Linf,
            n: 100_000,
            seed: 1,
        }
    }
}

/// `A2` giving asymptotic mean out-degree `mean` when `A1 = 1`: `mean(1-p)/p`.
pub fn a2_for_mean_degree(p: f64, mean: f64) -> f64 {
    mean * (1.0 - p) / p
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SpaError::domain(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if !(self.a1 > 0.0 && self.a1.is_finite()) {
            return Err(SpaError::domain(format!("A1 must be > 0, got {}", self.a1)));
        }
        if self.p * self.a1 >= 1.0 {
            return Err(SpaError::domain(format!(
                "p·A1 must be < 1, got {}",
                self.p * self.a1
            )));
        }
        if !(self.a2 > 0.0 && self.a2.is_finite()) {
            return Err(SpaError::domain(format!("A2 must be > 0, got {}", self.a2)));
        }
        if self.dimension == 0 {
            return Err(SpaError::domain("dimension must be >= 1"));
        }
        if self.n == 0 {
            return Err(SpaError::domain("n must be >= 1"));
        }
        if self.n > u32::MAX as usize {
            return Err(SpaError::domain(format!("n must be <= {}", u32::MAX)));
        }
        Ok(())
    }

    /// `min((A1·deg + A2) / t, 1)`.
    #[inline]
    pub fn sphere_volume(&self, in_degree: u32, t: u64) -> f64 {
        debug_assert!(t >= 1);
        ((self.a1 * in_degree as f64 + self.a2) / t as f64).min(1.0)
    }

    #[inline]
    pub fn sphere_radius(&self, in_degree: u32, t: u64) -> f64 {
        radius_for_volume(self.sphere_volume(in_degree, t), self.dimension, self.norm)
    }

    /// Same parameters with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        ModelParams { seed, ..self.clone() }
    }
}
