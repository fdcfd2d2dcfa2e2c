use serde::{Deserialize, Serialize};

use super::angle::{angular_distance, wrap};
use super::targets::Target;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Camera pan angle and the angular half-width of its field of view.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlatformState<T> {
    pan: T,
    fov_half_width: T,
}

impl<T: Scalar> PlatformState<T> {
    pub fn new(pan: T, fov_half_width: T) -> Result<Self> {
        if !pan.is_finite() {
            return Err(Error::NonFinite("pan"));
        }
        if !(fov_half_width > T::zero() && fov_half_width < T::PI()) {
            return Err(Error::OutOfRange {
                name: "fov_half_width",
                value: fov_half_width.to_f64_lossy(),
                reason: "must lie in (0, π)",
            });
        }
        Ok(Self {
            pan: wrap(pan),
            fov_half_width,
        })
    }

    pub fn pan(&self) -> T {
        self.pan
    }

    pub fn fov_half_width(&self) -> T {
        self.fov_half_width
    }
}

/// Deterministic pan transition `s' = wrap(s + u)`, `u ∈ [-π, π]`.
pub fn step_platform<T: Scalar>(state: PlatformState<T>, u: T) -> Result<PlatformState<T>> {
    if !u.is_finite() || u.abs() > T::PI() {
        return Err(Error::OutOfRange {
            name: "control input",
            value: u.to_f64_lossy(),
            reason: "must lie in [-π, π]",
        });
    }
    Ok(PlatformState {
        pan: wrap(state.pan + u),
        fov_half_width: state.fov_half_width,
    })
}

/// Whether the target's bearing lies within the camera's angular field of view.
pub fn in_fov<T: Scalar>(state: &PlatformState<T>, target: &Target<T>) -> bool {
    angular_distance(target.bearing(), state.pan) <= state.fov_half_width
}
