use rand::Rng;
use serde::{Deserialize, Serialize};

use super::std_normal;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gaussian random walk on the target distance, reflected into `[d_min, d_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetMotionModel<T> {
    pub noise_var: T,
    pub d_min: T,
    pub d_max: T,
}

impl<T: Scalar> Default for TargetMotionModel<T> {
    fn default() -> Self {
        Self {
            noise_var: T::lit(0.04),
            d_min: T::lit(1.0),
            d_max: T::lit(6.0),
        }
    }
}

impl<T: Scalar> TargetMotionModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_var >= T::zero()) {
            return Err(Error::OutOfRange {
                name: "motion_noise_var",
                value: self.noise_var.to_f64_lossy(),
                reason: "must be non-negative",
            });
        }
        if !(self.d_min > T::zero() && self.d_min < self.d_max) {
            return Err(Error::OutOfRange {
                name: "motion_d_min",
                value: self.d_min.to_f64_lossy(),
                reason: "need 0 < d_min < d_max",
            });
        }
        Ok(())
    }

    /// Fold `d` back into the bounds by mirror reflection.
    pub fn reflect(&self, d: T) -> T {
        let width = self.d_max - self.d_min;
        let period = width + width;
        let mut x = (d - self.d_min) % period;
        if x < T::zero() {
            x = x + period;
        }
        if x > width {
            x = period - x;
        }
        self.d_min + x
    }

    pub fn step<R: Rng + ?Sized>(&self, d: T, rng: &mut R) -> T {
        let z: T = std_normal(rng);
        self.reflect(d + z * self.noise_var.sqrt())
    }
}
