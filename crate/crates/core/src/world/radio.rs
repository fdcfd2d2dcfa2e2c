use rand::Rng;
use serde::{Deserialize, Serialize};

use super::angle::wrap;
use super::std_normal;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Log-distance path loss, directional attenuation and Gaussian RSSI noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioModel<T> {
    /// RSSI at the reference distance, dBm.
    pub kappa: T,
    /// Path-loss exponent.
    pub n_exp: T,
    /// Reference distance, m.
    pub delta: T,
    /// Observation noise standard deviation, dBm.
    pub sigma_rf: T,
    /// Curvature of the directional pattern `1 - c·Δ²`.
    pub atten_coeff: T,
}

impl<T: Scalar> Default for RadioModel<T> {
    fn default() -> Self {
        Self {
            kappa: T::lit(-30.0),
            n_exp: T::lit(2.0),
            delta: T::lit(1.0),
            sigma_rf: T::lit(3.0),
            atten_coeff: T::lit(0.5),
        }
    }
}

impl<T: Scalar> RadioModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rf >= T::zero()) {
            return Err(Error::OutOfRange {
                name: "sigma_rf",
                value: self.sigma_rf.to_f64_lossy(),
                reason: "must be non-negative",
            });
        }
        if !(self.delta > T::zero()) {
            return Err(Error::OutOfRange {
                name: "delta",
                value: self.delta.to_f64_lossy(),
                reason: "must be positive",
            });
        }
        if !(self.atten_coeff > T::zero()) {
            return Err(Error::OutOfRange {
                name: "atten_coeff",
                value: self.atten_coeff.to_f64_lossy(),
                reason: "must be positive",
            });
        }
        Ok(())
    }

    fn check_distance(d: T) -> Result<()> {
        if d > T::zero() && d.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                name: "distance",
                value: d.to_f64_lossy(),
                reason: "must be positive and finite",
            })
        }
    }

    /// Noise-free RSSI `κ - 10·n·log10(d/δ)`.
    pub fn path_loss(&self, d: T) -> Result<T> {
        Self::check_distance(d)?;
        Ok(self.kappa - T::lit(10.0) * self.n_exp * (d / self.delta).log10())
    }

    /// Distance at which the noise-free RSSI equals `rssi`.
    pub fn inverse_path_loss(&self, rssi: T) -> Result<T> {
        if !rssi.is_finite() {
            return Err(Error::NonFinite("rssi"));
        }
        Ok(self.delta * T::lit(10.0).powf((self.kappa - rssi) / (T::lit(10.0) * self.n_exp)))
    }

    /// Directional gain `clamp(1 - c·wrap(s - γ)², 0, 1)`.
    pub fn radiation_attenuation(&self, pan: T, bearing: T) -> T {
        let delta = wrap(pan - bearing);
        (T::one() - self.atten_coeff * delta * delta).max(T::zero()).min(T::one())
    }

    /// Omnidirectional receiver sample.
    pub fn sample_rssi_iso<R: Rng + ?Sized>(&self, d: T, rng: &mut R) -> Result<T> {
        let mean = self.path_loss(d)?;
        Ok(mean + self.noise(rng))
    }

    /// Directional receiver sample with the antenna boresight at `pan`.
    pub fn sample_rssi_dir<R: Rng + ?Sized>(&self, d: T, pan: T, bearing: T, rng: &mut R) -> Result<T> {
        let mean = self.path_loss(d)? * self.radiation_attenuation(pan, bearing);
        Ok(mean + self.noise(rng))
    }

    fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        // Always consume a draw so streams stay aligned when sigma is 0.
        let z: T = std_normal(rng);
        z * self.sigma_rf
    }
}
