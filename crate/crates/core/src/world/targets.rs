use rand::Rng;
use serde::{Deserialize, Serialize};

use super::angle::{angular_distance, wrap};
use super::uniform;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A target on the ground plane, position relative to the platform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target<T> {
    position: [T; 2],
}

impl<T: Scalar> Target<T> {
    pub fn new(position: [T; 2]) -> Result<Self> {
        let t = Self { position };
        if !(t.distance() > T::zero()) || !t.distance().is_finite() {
            return Err(Error::OutOfRange {
                name: "target distance",
                value: t.distance().to_f64_lossy(),
                reason: "must be positive and finite",
            });
        }
        Ok(t)
    }

    pub fn from_polar(distance: T, bearing: T) -> Result<Self> {
        Self::new([distance * bearing.cos(), distance * bearing.sin()])
    }

    pub fn position(&self) -> [T; 2] {
        self.position
    }

    pub fn distance(&self) -> T {
        self.position[0].hypot(self.position[1])
    }

    /// Four-quadrant bearing in `[-π, π)`.
    pub fn bearing(&self) -> T {
        wrap(self.position[1].atan2(self.position[0]))
    }
}

/// Targets around the platform and which of them is the transmitter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct World<T> {
    targets: Vec<Target<T>>,
    tx_index: usize,
}

impl<T: Scalar> World<T> {
    /// Checks the transmitter index and that all bearings are at least
    /// `min_separation` apart.
    pub fn new(targets: Vec<Target<T>>, tx_index: usize, min_separation: T) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Infeasible("a world needs at least one target".into()));
        }
        if tx_index >= targets.len() {
            return Err(Error::OutOfRange {
                name: "tx_index",
                value: tx_index as f64,
                reason: "must index an existing target",
            });
        }
        let w = Self { targets, tx_index };
        if let Some(sep) = w.min_bearing_separation() {
            if sep < min_separation {
                return Err(Error::Infeasible(format!(
                    "bearing separation {sep} below the minimum {min_separation}"
                )));
            }
        }
        Ok(w)
    }

    pub fn targets(&self) -> &[Target<T>] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn tx_index(&self) -> usize {
        self.tx_index
    }

    pub fn tx(&self) -> &Target<T> {
        &self.targets[self.tx_index]
    }

    /// Smallest wrapped bearing difference over all pairs (`None` for one target).
    pub fn min_bearing_separation(&self) -> Option<T> {
        let b: Vec<T> = self.targets.iter().map(Target::bearing).collect();
        let mut best: Option<T> = None;
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                let d = angular_distance(b[i], b[j]);
                best = Some(best.map_or(d, |m: T| m.min(d)));
            }
        }
        best
    }
}

/// Random world: bearings uniform with pairwise separation at least
/// `eps_gamma` (sequential rejection), distances uniform on `d_range`,
/// transmitter chosen uniformly.
pub fn spawn_world<T: Scalar, R: Rng + ?Sized>(
    n_targets: usize,
    d_range: (T, T),
    eps_gamma: T,
    rng: &mut R,
) -> Result<World<T>> {
    if n_targets == 0 {
        return Err(Error::Infeasible("n_targets must be at least 1".into()));
    }
    if !(eps_gamma > T::zero()) {
        return Err(Error::OutOfRange {
            name: "eps_gamma",
            value: eps_gamma.to_f64_lossy(),
            reason: "must be positive",
        });
    }
    let n = T::from_usize(n_targets).expect("usize fits scalar");
    if n * eps_gamma >= T::TAU() {
        return Err(Error::Infeasible(format!(
            "{n_targets} targets cannot be {eps_gamma} rad apart on a circle"
        )));
    }
    let (d_lo, d_hi) = d_range;
    if !(d_lo > T::zero() && d_lo <= d_hi) {
        return Err(Error::OutOfRange {
            name: "spawn distance range",
            value: d_lo.to_f64_lossy(),
            reason: "need 0 < d_min <= d_max",
        });
    }

    const TRIES_PER_TARGET: usize = 10_000;
    const RESTARTS: usize = 100;
    'restart: for _ in 0..RESTARTS {
        let mut bearings: Vec<T> = Vec::with_capacity(n_targets);
        while bearings.len() < n_targets {
            let mut placed = false;
            for _ in 0..TRIES_PER_TARGET {
                let b = uniform(rng, -T::PI(), T::PI());
                if bearings.iter().all(|&o| angular_distance(o, b) >= eps_gamma) {
                    bearings.push(b);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'restart;
            }
        }
        let targets = bearings
            .into_iter()
            .map(|b| Target::from_polar(uniform(rng, d_lo, d_hi), b))
            .collect::<Result<Vec<_>>>()?;
        let tx_index = rng.gen_range(0..n_targets);
        // Polar round-trip can shave the last ulp off a separation.
        let slack = eps_gamma * T::lit(1e-9);
        return World::new(targets, tx_index, eps_gamma - slack);
    }
    Err(Error::Infeasible(format!(
        "could not place {n_targets} targets {eps_gamma} rad apart"
    )))
}
