use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RF sampling interval, camera frames per RF sample and run lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    /// Seconds between RSSI samples (and control updates).
    pub t_rf: f64,
    /// Camera frames per RSSI sample.
    pub nu: usize,
    /// RSSI samples per discovery episode.
    pub n_test: usize,
    /// RSSI samples collected for POD training.
    pub n_train: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            t_rf: 0.1,
            nu: 10,
            n_test: 120,
            n_train: 900,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_rf > 0.0 && self.t_rf.is_finite()) {
            return Err(Error::OutOfRange {
                name: "t_rf",
                value: self.t_rf,
                reason: "must be positive",
            });
        }
        for (name, v) in [("nu", self.nu), ("n_test", self.n_test), ("n_train", self.n_train)] {
            if v == 0 {
                return Err(Error::OutOfRange {
                    name,
                    value: 0.0,
                    reason: "must be at least 1",
                });
            }
        }
        Ok(())
    }

    /// Camera frame period.
    pub fn camera_period(&self) -> f64 {
        self.t_rf / self.nu as f64
    }

    /// Time of the `k`-th RSSI sample (0-based), the first one at `t_rf`.
    pub fn rf_time(&self, k: usize) -> f64 {
        (k + 1) as f64 * self.t_rf
    }
}
