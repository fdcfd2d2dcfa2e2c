//! Synthetic environment: targets on the ground plane, the pan platform,
//! the radio channel, the camera detector and the timing model.
//!
//! Every operation is a pure function of explicit state and an RNG.

mod angle;
mod detection;
mod motion;
mod platform;
mod radio;
mod targets;
mod timing;

pub use angle::{angular_distance, wrap, wrap_angle};
pub use detection::{detect_frame, DetectionModel};
pub use motion::TargetMotionModel;
pub use platform::{in_fov, step_platform, PlatformState};
pub use radio::RadioModel;
pub use targets::{spawn_world, Target, World};
pub use timing::TimingConfig;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

#[inline]
pub(crate) fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: T, hi: T) -> T {
    lo + (hi - lo) * T::lit(rng.gen::<f64>())
}

#[inline]
pub(crate) fn std_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}
