use rand::Rng;
use serde::{Deserialize, Serialize};

use super::platform::{in_fov, PlatformState};
use super::targets::World;
use crate::scalar::Scalar;

/// Double-sigmoid probability of detection versus distance,
/// `[(1 + e^{a(d - b)}) (1 + e^{-c(d - e)})]^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel<T> {
    pub slope_far: T,
    pub center_far: T,
    pub slope_near: T,
    pub center_near: T,
}

impl<T: Scalar> Default for DetectionModel<T> {
    fn default() -> Self {
        Self {
            slope_far: T::lit(4.0),
            center_far: T::lit(4.5),
            slope_near: T::lit(1.0),
            center_near: T::lit(2.5),
        }
    }
}

impl<T: Scalar> DetectionModel<T> {
    /// Probability that an in-view target at distance `d` is detected.
    pub fn pod_true(&self, d: T) -> T {
        let far = T::one() + (self.slope_far * (d - self.center_far)).exp();
        let near = T::one() + (-self.slope_near * (d - self.center_near)).exp();
        let p = T::one() / (far * near);
        if p.is_nan() {
            T::zero()
        } else {
            p
        }
    }
}

/// One camera frame: a Bernoulli detection per target, forced false outside the FoV.
pub fn detect_frame<T: Scalar, R: Rng + ?Sized>(
    world: &World<T>,
    state: &PlatformState<T>,
    det: &DetectionModel<T>,
    rng: &mut R,
) -> Vec<bool> {
    world
        .targets()
        .iter()
        .map(|t| in_fov(state, t) && T::lit(rng.gen::<f64>()) < det.pod_true(t.distance()))
        .collect()
}
