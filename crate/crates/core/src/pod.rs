//! Self-supervised probability-of-detection learning.
//!
//! A single target random-walks in distance while the platform keeps it in
//! view. Every RF tick pairs the omnidirectional RSSI with the fraction of
//! the `ν` camera frames in which the detector fired. A heteroscedastic GP
//! over RSSI is then fitted to those empirical labels.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{fit_hyperparams_with, r2_score, FitOptions, FitSummary, GpDataset, GpModel, KernelSpec, Noise};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::world::{detect_frame, DetectionModel, PlatformState, RadioModel, Target, TargetMotionModel, TimingConfig, World};

/// One training pair: RSSI input and empirical POD label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PodTrainingSample<T> {
    pub rssi_iso: T,
    pub empirical_pod: T,
    pub label_noise_var: T,
}

/// `p̃(1 − p̃)/ν`, floored at `1/(4ν²)` so that all-or-nothing windows keep a
/// positive variance.
pub fn label_noise_var<T: Scalar>(p_tilde: T, nu: usize) -> T {
    let nu = T::lit(nu as f64);
    let floor = T::one() / (T::lit(4.0) * nu * nu);
    (p_tilde * (T::one() - p_tilde) / nu).max(floor)
}

/// Fraction of successes among `nu` frames.
pub fn empirical_pod<T: Scalar>(successes: usize, nu: usize) -> T {
    T::lit(successes as f64 / nu as f64)
}

/// Simulate `timing.n_train` RF ticks of the tracked single-target walk.
///
/// The walk starts halfway between the motion bounds. At each tick the
/// platform points at the target, `ν` frames are drawn, the RSSI is sampled,
/// and the target then moves.
pub fn collect_training_dataset<T: Scalar, R: Rng + ?Sized>(
    radio: &RadioModel<T>,
    det: &DetectionModel<T>,
    motion: &TargetMotionModel<T>,
    timing: &TimingConfig,
    fov_half_width: T,
    rng: &mut R,
) -> Result<Vec<PodTrainingSample<T>>> {
    timing.validate()?;
    radio.validate()?;
    motion.validate()?;
    let platform = PlatformState::new(T::zero(), fov_half_width)?;
    let mut d = (motion.d_min + motion.d_max) * T::lit(0.5);
    let mut out = Vec::with_capacity(timing.n_train);
    for _ in 0..timing.n_train {
        let world = World::new(vec![Target::from_polar(d, T::zero())?], 0, T::zero())?;
        let successes = (0..timing.nu)
            .filter(|_| detect_frame(&world, &platform, det, rng)[0])
            .count();
        let p = empirical_pod(successes, timing.nu);
        let rssi_iso = radio.sample_rssi_iso(d, rng)?;
        out.push(PodTrainingSample {
            rssi_iso,
            empirical_pod: p,
            label_noise_var: label_noise_var(p, timing.nu),
        });
        d = motion.step(d, rng);
    }
    Ok(out)
}

/// Hyperparameter search used for POD training: the default box and
/// budget plus a learned homoscedastic excess noise on top of the binomial
/// label variances. The RSSI inputs are themselves noisy, and without the
/// excess term the fit chases label noise.
pub fn pod_fit_options() -> FitOptions {
    FitOptions::default().with_extra_noise(-9.0, 0.0)
}

/// Learned detectability `p̂_D(r)` over RSSI.
#[derive(Clone, Debug)]
pub struct PodModel<T> {
    gp: GpModel<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
struct PodModelFile<T> {
    kernel: KernelSpec<T>,
    mean_const: T,
    noise_floor: T,
    dataset: GpDataset<T>,
}

impl<T: Scalar> PodModel<T> {
    pub fn from_gp(gp: GpModel<T>) -> Result<Self> {
        if gp.dataset().dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: gp.dataset().dim(),
            });
        }
        Ok(Self { gp })
    }

    pub fn gp(&self) -> &GpModel<T> {
        &self.gp
    }

    /// Posterior mean at `rssi`, clamped to `[0, 1]`.
    pub fn predict(&self, rssi: T) -> T {
        let m = self
            .gp
            .predict_mean(&Matrix::column(&[rssi]))
            .map(|v| v[0])
            .unwrap_or(T::zero());
        clamp01(m)
    }

    /// Clamped posterior mean and unclamped posterior std over a grid.
    pub fn predict_curve(&self, rssi: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let (mean, var) = self.gp.predict_marginal(&Matrix::column(rssi))?;
        Ok((
            mean.into_iter().map(clamp01).collect(),
            var.into_iter().map(|v| v.max(T::zero()).sqrt()).collect(),
        ))
    }

    pub fn save_json(&self, path: &Path) -> Result<()>
    where
        T: Serialize,
    {
        let file = PodModelFile {
            kernel: self.gp.kernel().clone(),
            mean_const: self.gp.mean_const(),
            noise_floor: self.gp.noise_floor(),
            dataset: self.gp.dataset().clone(),
        };
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &file)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let file: PodModelFile<T> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        let gp = GpModel::with_noise_floor(file.kernel, file.mean_const, file.dataset, file.noise_floor)?;
        Self::from_gp(gp)
    }
}

fn clamp01<T: Scalar>(v: T) -> T {
    if v.is_nan() {
        T::zero()
    } else {
        v.max(T::zero()).min(T::one())
    }
}

/// Fit with [`pod_fit_options`]: zero prior mean, per-point label noise.
pub fn train_pod_model<T: Scalar>(samples: &[PodTrainingSample<T>], spec: &KernelSpec<T>) -> Result<PodModel<T>> {
    train_pod_model_with(samples, spec, &pod_fit_options()).map(|(m, _)| m)
}

pub fn train_pod_model_with<T: Scalar>(
    samples: &[PodTrainingSample<T>],
    spec: &KernelSpec<T>,
    opts: &FitOptions,
) -> Result<(PodModel<T>, FitSummary)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData("POD training needs at least two samples"));
    }
    let inputs: Vec<T> = samples.iter().map(|s| s.rssi_iso).collect();
    let ds = GpDataset::new(
        Matrix::column(&inputs),
        samples.iter().map(|s| s.empirical_pod).collect(),
        Noise::PerPoint(samples.iter().map(|s| s.label_noise_var).collect()),
    )?;
    let (gp, summary) = fit_hyperparams_with(ds, spec, T::zero(), opts)?;
    Ok((PodModel::from_gp(gp)?, summary))
}

/// One point of the fitted curve against the ground truth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PodFitPoint<T> {
    pub rssi: T,
    pub pod_true: T,
    pub pred_mean: T,
    pub pred_std: T,
}

/// True POD at an RSSI value, through the noise-free path-loss inverse.
///
/// Only RSSI at or below the path-loss intercept (distance ≥ reference
/// distance) is accepted.
pub fn pod_true_at_rssi<T: Scalar>(det: &DetectionModel<T>, radio: &RadioModel<T>, rssi: T) -> Result<T> {
    if !rssi.is_finite() || rssi > radio.kappa {
        return Err(Error::OutOfRange {
            name: "rssi grid value",
            value: rssi.to_f64_lossy(),
            reason: "must be finite and not above the path-loss intercept",
        });
    }
    Ok(det.pod_true(radio.inverse_path_loss(rssi)?))
}

pub fn fit_curve<T: Scalar>(
    model: &PodModel<T>,
    det: &DetectionModel<T>,
    radio: &RadioModel<T>,
    grid: &[T],
) -> Result<Vec<PodFitPoint<T>>> {
    if grid.is_empty() {
        return Err(Error::InsufficientData("evaluation grid is empty"));
    }
    let truth = grid
        .iter()
        .map(|&r| pod_true_at_rssi(det, radio, r))
        .collect::<Result<Vec<_>>>()?;
    let (mean, std) = model.predict_curve(grid)?;
    Ok((0..grid.len())
        .map(|i| PodFitPoint {
            rssi: grid[i],
            pod_true: truth[i],
            pred_mean: mean[i],
            pred_std: std[i],
        })
        .collect())
}

/// R² of the clamped posterior mean against the true POD on `grid`.
pub fn evaluate_pod_fit<T: Scalar>(
    model: &PodModel<T>,
    det: &DetectionModel<T>,
    radio: &RadioModel<T>,
    grid: &[T],
) -> Result<T> {
    r2_from_curve(&fit_curve(model, det, radio, grid)?)
}

pub fn r2_from_curve<T: Scalar>(curve: &[PodFitPoint<T>]) -> Result<T> {
    let truth: Vec<T> = curve.iter().map(|p| p.pod_true).collect();
    let pred: Vec<T> = curve.iter().map(|p| p.pred_mean).collect();
    r2_score(&truth, &pred)
}

/// `n` evenly spaced RSSI values spanning the noise-free image of the
/// motion bounds, `[g(d_max), g(d_min)]`.
pub fn default_eval_grid<T: Scalar>(radio: &RadioModel<T>, motion: &TargetMotionModel<T>, n: usize) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::InsufficientData("evaluation grid needs at least two points"));
    }
    let lo = radio.path_loss(motion.d_max)?;
    let hi = radio.path_loss(motion.d_min)?;
    let step = (hi - lo) / T::lit((n - 1) as f64);
    Ok((0..n).map(|i| lo + step * T::lit(i as f64)).collect())
}

pub fn write_dataset_csv<T: Scalar>(path: &Path, samples: &[PodTrainingSample<T>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rssi_dbm", "empirical_pod", "noise_var"])?;
    for s in samples {
        w.write_record([
            s.rssi_iso.to_f64_lossy().to_string(),
            s.empirical_pod.to_f64_lossy().to_string(),
            s.label_noise_var.to_f64_lossy().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fit_csv<T: Scalar>(path: &Path, curve: &[PodFitPoint<T>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rssi_dbm", "pod_true", "pod_pred_mean", "pod_pred_std"])?;
    for p in curve {
        w.write_record([
            p.rssi.to_f64_lossy().to_string(),
            p.pod_true.to_f64_lossy().to_string(),
            p.pred_mean.to_f64_lossy().to_string(),
            p.pred_std.to_f64_lossy().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
