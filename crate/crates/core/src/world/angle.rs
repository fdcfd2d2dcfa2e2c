use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Map `theta` onto `[-π, π)`. Non-finite input propagates as NaN.
#[inline]
pub fn wrap<T: Scalar>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut r = (theta + T::PI()) % two_pi;
    if r < T::zero() {
        r = r + two_pi;
    }
    if r >= two_pi {
        r = T::zero();
    }
    let out = r - T::PI();
    // Rounding in the shift can land a hair below -π.
    if out < -T::PI() {
        -T::PI()
    } else {
        out
    }
}

/// Checked [`wrap`]: result `≡ theta (mod 2π)` and in `[-π, π)`.
pub fn wrap_angle<T: Scalar>(theta: T) -> Result<T> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap(theta))
}

/// `|wrap(a - b)|`, the shortest arc between two bearings.
#[inline]
pub fn angular_distance<T: Scalar>(a: T, b: T) -> T {
    wrap(a - b).abs()
}
