//! Bayesian-optimization controller over the pan angle.
//!
//! Each RF tick the platform measures the fused radio-visual label at its
//! current pan, conditions a GP surrogate on it, reads the bearing estimate
//! off the posterior mean, associates it with the nearest target and picks
//! the next pan by UCB.
//!
//! The surrogate sees a pan `s` as the point `(cos s, sin s)` so that the
//! kernel is periodic in the angle.

use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{fit_hyperparams_with, FitOptions, FitSummary, GpDataset, GpModel, KernelSpec, Noise};
use crate::linalg::Matrix;
use crate::pod::PodModel;
use crate::world::{
    angular_distance, detect_frame, step_platform, uniform, wrap, DetectionModel, PlatformState, RadioModel,
    TimingConfig, World,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Fused label `y_d · y_rf`.
    Ra2ViPAS,
    /// Directional radio only.
    RaPAS,
    /// Visual POD mismatch only.
    RaViPAS,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Ra2ViPAS, Variant::RaPAS, Variant::RaViPAS];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ra2ViPAS => "ra2vipas",
            Self::RaPAS => "rapas",
            Self::RaViPAS => "ravipas",
        }
    }

    /// Stable small integer used in seed derivation.
    pub fn id(self) -> u64 {
        match self {
            Self::Ra2ViPAS => 0,
            Self::RaPAS => 1,
            Self::RaViPAS => 2,
        }
    }

    pub fn fuse(self, y_d: f64, y_rf: f64) -> f64 {
        match self {
            Self::Ra2ViPAS => y_d * y_rf,
            Self::RaPAS => y_rf,
            Self::RaViPAS => y_d,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ra2vipas" => Ok(Self::Ra2ViPAS),
            "rapas" => Ok(Self::RaPAS),
            "ravipas" => Ok(Self::RaViPAS),
            other => Err(Error::Config {
                key: "variants".into(),
                message: format!("unknown variant `{other}` (expected ra2vipas, rapas or ravipas)"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    /// UCB weight; the bonus is `√β · σ`.
    pub beta: f64,
    /// RSSI magnitude scale in `y_rf = |z_dir| / ζ`.
    pub zeta: f64,
    pub grid_size: usize,
    /// Random pan targets drawn before UCB takes over.
    pub warmup_steps: usize,
    pub refit_every: usize,
    pub variant: Variant,
    pub fov_half_width: f64,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            beta: 4.0,
            zeta: 50.0,
            grid_size: 721,
            warmup_steps: 5,
            refit_every: 10,
            variant: Variant::Ra2ViPAS,
            fov_half_width: 15f64.to_radians(),
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, reason: &'static str| Err(Error::OutOfRange { name, value, reason });
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta", self.beta, "must be finite and non-negative");
        }
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return bad("zeta", self.zeta, "must be positive");
        }
        if self.grid_size < 8 {
            return bad("grid_size", self.grid_size as f64, "must be at least 8");
        }
        if self.warmup_steps < 1 {
            return bad("warmup_steps", 0.0, "must be at least 1");
        }
        if self.refit_every < 1 {
            return bad("refit_every", 0.0, "must be at least 1");
        }
        if !(self.fov_half_width > 0.0 && self.fov_half_width < std::f64::consts::PI) {
            return bad("fov_half_width", self.fov_half_width, "must lie in (0, pi)");
        }
        Ok(())
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        Self {
            variant,
            ..self.clone()
        }
    }
}

/// Radio channel and camera detector of the simulated platform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SensorModels {
    pub radio: RadioModel<f64>,
    pub detection: DetectionModel<f64>,
}

/// One fused sample `(s_j, y_j)` plus its factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoObservation {
    pub pan: f64,
    pub y_d: f64,
    pub y_rf: f64,
    pub y: f64,
}

pub fn build_observation(
    pan: f64,
    z_iso: f64,
    z_dir: f64,
    p_tilde: f64,
    pod: &PodModel<f64>,
    cfg: &BoConfig,
) -> Result<BoObservation> {
    if !(0.0..=1.0).contains(&p_tilde) {
        return Err(Error::OutOfRange {
            name: "p_tilde",
            value: p_tilde,
            reason: "must lie in [0, 1]",
        });
    }
    let y_d = -(pod.predict(z_iso) - p_tilde).abs();
    let y_rf = z_dir.abs() / cfg.zeta;
    Ok(BoObservation {
        pan,
        y_d,
        y_rf,
        y: cfg.variant.fuse(y_d, y_rf),
    })
}

/// Raw sensor readings of one RF tick and the observation built from them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepMeasurement {
    pub z_iso: f64,
    pub z_dir: f64,
    pub p_tilde: f64,
    pub observation: BoObservation,
}

/// Hold the pan for `ν` frames and sample both receivers once.
///
/// A frame counts as a success when any in-view target is detected.
pub fn measure_step<R: Rng + ?Sized>(
    world: &World<f64>,
    platform: &PlatformState<f64>,
    sensors: &SensorModels,
    timing: &TimingConfig,
    pod: &PodModel<f64>,
    cfg: &BoConfig,
    rng: &mut R,
) -> Result<StepMeasurement> {
    let successes = (0..timing.nu)
        .filter(|_| detect_frame(world, platform, &sensors.detection, rng).contains(&true))
        .count();
    let p_tilde = successes as f64 / timing.nu as f64;
    let tx = world.tx();
    let z_iso = sensors.radio.sample_rssi_iso(tx.distance(), rng)?;
    let z_dir = sensors
        .radio
        .sample_rssi_dir(tx.distance(), platform.pan(), tx.bearing(), rng)?;
    let observation = build_observation(platform.pan(), z_iso, z_dir, p_tilde, pod, cfg)?;
    Ok(StepMeasurement {
        z_iso,
        z_dir,
        p_tilde,
        observation,
    })
}

/// `n` evenly spaced pans on `[-π, π)`.
pub fn pan_grid(n: usize) -> Vec<f64> {
    let step = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| -std::f64::consts::PI + step * i as f64).collect()
}

#[inline]
pub fn embed(pan: f64) -> [f64; 2] {
    [pan.cos(), pan.sin()]
}

fn embed_all(pans: &[f64]) -> Matrix<f64> {
    Matrix::from_fn(pans.len(), 2, |i, j| embed(pans[i])[j])
}

/// Index of the largest value, lowest index on ties; NaN never wins.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

#[inline]
pub fn ucb_value(mean: f64, std: f64, beta: f64) -> f64 {
    mean + beta.sqrt() * std
}

/// `μ(s) + √β σ(s)` at every pan in `grid`.
pub fn ucb_acquisition(surrogate: &GpModel<f64>, grid: &[f64], beta: f64) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InsufficientData("acquisition grid is empty"));
    }
    let (mean, var) = surrogate.predict_marginal(&embed_all(grid))?;
    Ok(mean
        .iter()
        .zip(&var)
        .map(|(&m, &v)| ucb_value(m, v.max(0.0).sqrt(), beta))
        .collect())
}

/// Hyperparameter search for the pan surrogate. Fused labels are small, so
/// the signal-variance box reaches further down than the default.
pub fn surrogate_fit_options() -> FitOptions {
    FitOptions {
        log_signal_var: (-12.0, 3.0),
        log_lengthscale: (-3.0, 1.5),
        log_extra_noise: Some((-14.0, 0.0)),
        grid: 4,
        starts: 2,
        max_evals_per_start: 30,
    }
}

/// Surrogate hyperparameters used until there are enough points to fit.
const DEFAULT_SIGNAL_VAR: f64 = 1.0;
const DEFAULT_LENGTHSCALE: f64 = 0.5;
const DEFAULT_NOISE_VAR: f64 = 1e-2;

/// Controller state after some number of RF ticks.
#[derive(Clone, Debug)]
pub struct BoState {
    pub observations: Vec<BoObservation>,
    pub surrogate: GpModel<f64>,
    pub gamma_hat: f64,
    pub tx_estimate: Option<usize>,
    pub control: f64,
    pub last_fit: Option<FitSummary>,
}

impl Default for BoState {
    fn default() -> Self {
        Self::new()
    }
}

impl BoState {
    pub fn new() -> Self {
        let surrogate = GpModel::new(
            KernelSpec::matern52(DEFAULT_SIGNAL_VAR, DEFAULT_LENGTHSCALE),
            0.0,
            GpDataset::empty(2, DEFAULT_NOISE_VAR),
        )
        .expect("default surrogate is valid");
        Self {
            observations: Vec::new(),
            surrogate,
            gamma_hat: 0.0,
            tx_estimate: None,
            control: 0.0,
            last_fit: None,
        }
    }

    /// Record an observation and update the surrogate.
    ///
    /// Hyperparameters (and the empirical prior mean) are refit while the
    /// dataset is small and then at every multiple of `refit_every`; other
    /// steps extend the factorization.
    pub fn observe(&mut self, obs: BoObservation, cfg: &BoConfig) -> Result<()> {
        self.observations.push(obs);
        let n = self.observations.len();
        if n == 1 {
            self.surrogate = GpModel::new(
                KernelSpec::matern52(DEFAULT_SIGNAL_VAR, DEFAULT_LENGTHSCALE),
                obs.y,
                GpDataset::new(
                    Matrix::from_row_major(1, 2, embed(obs.pan).to_vec())?,
                    vec![obs.y],
                    Noise::Homoscedastic(DEFAULT_NOISE_VAR),
                )?,
            )?;
        } else if n <= cfg.refit_every || n % cfg.refit_every == 0 {
            self.refit()?;
        } else {
            self.surrogate.push(&embed(obs.pan), obs.y, 0.0)?;
        }
        Ok(())
    }

    fn refit(&mut self) -> Result<()> {
        let pans: Vec<f64> = self.observations.iter().map(|o| o.pan).collect();
        let ys: Vec<f64> = self.observations.iter().map(|o| o.y).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let ds = GpDataset::new(embed_all(&pans), ys, Noise::Homoscedastic(0.0))?;
        let spec = KernelSpec::matern52(DEFAULT_SIGNAL_VAR, DEFAULT_LENGTHSCALE);
        let (model, summary) = fit_hyperparams_with(ds, &spec, mean, &surrogate_fit_options())?;
        self.surrogate = model;
        self.last_fit = Some(summary);
        Ok(())
    }
}

/// Grid argmax of the surrogate posterior mean.
pub fn estimate_gamma(state: &BoState, grid: &[f64]) -> Result<f64> {
    if state.observations.is_empty() {
        return Err(Error::InsufficientData("bearing estimate needs at least one observation"));
    }
    let mean = state.surrogate.predict_mean(&embed_all(grid))?;
    argmax_first(&mean)
        .map(|i| grid[i])
        .ok_or(Error::Degenerate("posterior mean is NaN on the whole grid"))
}

/// Index of the target whose bearing is closest to `gamma_hat`, lowest index on ties.
pub fn associate_tx(gamma_hat: f64, world: &World<f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, t) in world.targets().iter().enumerate() {
        let d = angular_distance(gamma_hat, t.bearing());
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Pan increment for the next step; zero on camera frames between RF ticks.
pub fn select_control<R: Rng + ?Sized>(
    state: &BoState,
    platform: &PlatformState<f64>,
    cfg: &BoConfig,
    grid: &[f64],
    step_index: usize,
    on_rf_tick: bool,
    rng: &mut R,
) -> Result<f64> {
    if !on_rf_tick {
        return Ok(0.0);
    }
    let target = if step_index < cfg.warmup_steps {
        uniform(rng, -std::f64::consts::PI, std::f64::consts::PI)
    } else {
        let acq = ucb_acquisition(&state.surrogate, grid, cfg.beta)?;
        let i = argmax_first(&acq).ok_or(Error::Degenerate("acquisition is NaN on the whole grid"))?;
        grid[i]
    };
    Ok(wrap(target - platform.pan()))
}

/// One row of an episode trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_seconds: f64,
    pub pan_rad: f64,
    pub z_iso_dbm: f64,
    pub z_dir_dbm: f64,
    pub p_tilde: f64,
    pub y_d: f64,
    pub y_rf: f64,
    pub y: f64,
    pub gamma_hat_rad: f64,
    pub tx_estimate: usize,
    pub correct: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeTrace {
    pub rows: Vec<TraceRow>,
}

impl EpisodeTrace {
    pub fn indicators(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.correct).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "t_seconds",
            "pan_rad",
            "z_iso_dbm",
            "z_dir_dbm",
            "p_tilde",
            "y_d",
            "y_rf",
            "y",
            "gamma_hat_rad",
            "tx_estimate",
            "correct",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.t_seconds.to_string(),
                r.pan_rad.to_string(),
                r.z_iso_dbm.to_string(),
                r.z_dir_dbm.to_string(),
                r.p_tilde.to_string(),
                r.y_d.to_string(),
                r.y_rf.to_string(),
                r.y.to_string(),
                r.gamma_hat_rad.to_string(),
                r.tx_estimate.to_string(),
                u8::from(r.correct).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run `timing.n_test` RF ticks of the controller on a frozen world,
/// starting from pan 0.
pub fn run_episode<R: Rng + ?Sized>(
    world: &World<f64>,
    timing: &TimingConfig,
    sensors: &SensorModels,
    pod: &PodModel<f64>,
    cfg: &BoConfig,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    cfg.validate()?;
    timing.validate()?;
    sensors.radio.validate()?;
    if world.is_empty() {
        return Err(Error::InsufficientData("world has no targets"));
    }
    let grid = pan_grid(cfg.grid_size);
    let mut platform = PlatformState::new(0.0, cfg.fov_half_width)?;
    let mut state = BoState::new();
    let mut trace = EpisodeTrace {
        rows: Vec::with_capacity(timing.n_test),
    };
    for k in 0..timing.n_test {
        let m = measure_step(world, &platform, sensors, timing, pod, cfg, rng)?;
        state.observe(m.observation, cfg)?;
        state.gamma_hat = estimate_gamma(&state, &grid)?;
        let tx_estimate = associate_tx(state.gamma_hat, world);
        state.tx_estimate = Some(tx_estimate);
        trace.rows.push(TraceRow {
            t_seconds: timing.rf_time(k),
            pan_rad: platform.pan(),
            z_iso_dbm: m.z_iso,
            z_dir_dbm: m.z_dir,
            p_tilde: m.p_tilde,
            y_d: m.observation.y_d,
            y_rf: m.observation.y_rf,
            y: m.observation.y,
            gamma_hat_rad: state.gamma_hat,
            tx_estimate,
            correct: tx_estimate == world.tx_index(),
        });
        state.control = select_control(&state, &platform, cfg, &grid, k, true, rng)?;
        platform = step_platform(platform, state.control)?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Target;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn constant_pod(p: f64) -> PodModel<f64> {
        let gp = GpModel::new(KernelSpec::matern52(1e-6, 1.0), p, GpDataset::empty(1, 0.0)).unwrap();
        PodModel::from_gp(gp).unwrap()
    }

    fn fixed_state(pans: &[f64], ys: &[f64], mean: f64, kernel: KernelSpec<f64>, noise: f64) -> BoState {
        let mut s = BoState::new();
        s.observations = pans
            .iter()
            .zip(ys)
            .map(|(&pan, &y)| BoObservation {
                pan,
                y_d: 0.0,
                y_rf: 0.0,
                y,
            })
            .collect();
        s.surrogate = GpModel::new(
            kernel,
            mean,
            GpDataset::new(embed_all(pans), ys.to_vec(), Noise::Homoscedastic(noise)).unwrap(),
        )
        .unwrap();
        s
    }

    #[test]
    fn observation_examples() {
        let cfg = BoConfig::default();
        let o = build_observation(0.0, -40.0, -50.0, 0.5, &constant_pod(0.5), &cfg).unwrap();
        assert_eq!((o.y_d, o.y_rf, o.y), (0.0, 1.0, 0.0));
        let o = build_observation(0.0, -40.0, -40.0, 0.3, &constant_pod(0.8), &cfg).unwrap();
        assert!((o.y_d + 0.5).abs() < 1e-12 && (o.y_rf - 0.8).abs() < 1e-12 && (o.y + 0.4).abs() < 1e-12);
        let o = build_observation(0.0, -40.0, -40.0, 0.3, &constant_pod(0.8), &cfg.with_variant(Variant::RaPAS)).unwrap();
        assert!((o.y - 0.8).abs() < 1e-12);
        let o = build_observation(0.0, -40.0, -40.0, 0.3, &constant_pod(0.8), &cfg.with_variant(Variant::RaViPAS)).unwrap();
        assert!((o.y + 0.5).abs() < 1e-12);
        assert!(build_observation(0.0, -40.0, -40.0, 1.5, &constant_pod(0.8), &cfg).is_err());
    }

    #[test]
    fn empty_fov_gives_zero_p_tilde() {
        let world = World::new(vec![Target::from_polar(3.0, PI / 2.0).unwrap()], 0, 0.0).unwrap();
        let platform = PlatformState::new(-PI / 2.0, 0.2).unwrap();
        let sensors = SensorModels::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pod = constant_pod(0.7);
        let m = measure_step(&world, &platform, &sensors, &TimingConfig::default(), &pod, &BoConfig::default(), &mut rng)
            .unwrap();
        assert_eq!(m.p_tilde, 0.0);
        assert!((m.observation.y_d + 0.7).abs() < 1e-12);
    }

    #[test]
    fn aligned_noise_free_measurement_maximizes_y_rf() {
        let world = World::new(vec![Target::from_polar(2.0, 0.7).unwrap()], 0, 0.0).unwrap();
        let sensors = SensorModels {
            radio: RadioModel {
                sigma_rf: 0.0,
                ..RadioModel::default()
            },
            ..SensorModels::default()
        };
        let cfg = BoConfig::default();
        let pod = constant_pod(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let at = |pan: f64, rng: &mut ChaCha8Rng| {
            let p = PlatformState::new(pan, cfg.fov_half_width).unwrap();
            measure_step(&world, &p, &sensors, &TimingConfig::default(), &pod, &cfg, rng)
                .unwrap()
                .observation
                .y_rf
        };
        let aligned = at(0.7, &mut rng);
        let expect = sensors.radio.path_loss(2.0).unwrap().abs() / 50.0;
        assert!((aligned - expect).abs() < 1e-12);
        for s in pan_grid(90) {
            assert!(at(s, &mut rng) <= aligned + 1e-12);
        }
    }

    #[test]
    fn ucb_examples() {
        // Prior-only surrogate with mean 0.2 and std 0.1.
        let gp = GpModel::new(KernelSpec::matern52(0.01, 1.0), 0.2, GpDataset::empty(2, 0.0)).unwrap();
        for v in ucb_acquisition(&gp, &pan_grid(16), 4.0).unwrap() {
            assert!((v - 0.4).abs() < 1e-12);
        }
        let st = fixed_state(&[-0.5, 0.5], &[1.0, -0.3], 0.0, KernelSpec::matern52(1.0, 0.4), 1e-3);
        let grid = pan_grid(64);
        let (mean, _) = st.surrogate.predict_marginal(&embed_all(&grid)).unwrap();
        assert_eq!(ucb_acquisition(&st.surrogate, &grid, 0.0).unwrap(), mean);
    }

    #[test]
    fn large_beta_explores_the_widest_gap() {
        let st = fixed_state(&[-0.3, 0.3], &[0.1, 0.1], 0.0, KernelSpec::matern52(1.0, 0.5), 1e-4);
        let grid = pan_grid(721);
        let acq = ucb_acquisition(&st.surrogate, &grid, 1e8).unwrap();
        let (_, var) = st.surrogate.predict_marginal(&embed_all(&grid)).unwrap();
        let i = argmax_first(&acq).unwrap();
        let vmax = var.iter().cloned().fold(f64::MIN, f64::max);
        assert!(var[i] >= vmax - 1e-12);
        // Farthest from both samples is the antipode of their midpoint.
        assert!(angular_distance(grid[i], PI) < 1e-9);
    }

    #[test]
    fn greedy_control_points_at_the_mean_peak() {
        let grid = pan_grid(721);
        let s0 = grid[400];
        let st = fixed_state(&[s0], &[1.0], 0.0, KernelSpec::matern52(1.0, 0.3), 1e-6);
        let platform = PlatformState::new(-2.0, 0.2).unwrap();
        let cfg = BoConfig {
            beta: 0.0,
            ..BoConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = select_control(&st, &platform, &cfg, &grid, 10, true, &mut rng).unwrap();
        assert!((wrap(platform.pan() + u) - s0).abs() < 1e-9);
        assert_eq!(select_control(&st, &platform, &cfg, &grid, 10, false, &mut rng).unwrap(), 0.0);
        assert_eq!(estimate_gamma(&st, &grid).unwrap(), s0);
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0, f64::NAN]), Some(1));
        assert_eq!(argmax_first(&[f64::NAN]), None);
        let st = fixed_state(&[0.0], &[0.0], 0.0, KernelSpec::matern52(1.0, 0.3), 1e-6);
        // Zero label at the prior mean gives a flat posterior mean.
        let grid = pan_grid(32);
        assert_eq!(estimate_gamma(&st, &grid).unwrap(), grid[0]);
        assert!(estimate_gamma(&BoState::new(), &grid).is_err());
    }

    #[test]
    fn association_examples() {
        let bearings = [0.0, 1.0, 2.0, 3.0];
        let world = World::new(
            bearings.iter().map(|&b| Target::from_polar(3.0, b).unwrap()).collect(),
            0,
            0.1,
        )
        .unwrap();
        assert_eq!(associate_tx(world.targets()[3].bearing(), &world), 3);
        // Midway between bearings 1 and 2.
        let mid = 0.5 * (world.targets()[1].bearing() + world.targets()[2].bearing());
        assert_eq!(associate_tx(mid, &world), 1);
        assert_eq!(associate_tx(-3.1, &world), 3);
    }

    #[test]
    fn observe_keeps_insertion_order_and_count() {
        let cfg = BoConfig::default();
        let mut st = BoState::new();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 0..25 {
            let pan = uniform(&mut rng, -PI, PI);
            let obs = BoObservation {
                pan,
                y_d: 0.0,
                y_rf: 0.0,
                y: (pan - 1.0).cos(),
            };
            st.observe(obs, &cfg).unwrap();
            assert_eq!(st.surrogate.dataset().len(), k + 1);
            assert_eq!(st.surrogate.dataset().inputs.row(k), &embed(pan));
            assert_eq!(*st.surrogate.dataset().labels.last().unwrap(), obs.y);
        }
    }

    #[test]
    fn dense_noise_free_fused_samples_locate_the_transmitter() {
        // Easy instance: attenuation stays positive all round, the camera sees
        // the transmitter within 3° of it, and the POD model is exact. The fused label is then 0 at the transmitter and strictly
        // negative elsewhere.
        let grid = pan_grid(721);
        let spacing = grid[1] - grid[0];
        let gamma = grid[252];
        let radio = RadioModel {
            sigma_rf: 0.0,
            atten_coeff: 0.09,
            ..RadioModel::default()
        };
        let det = DetectionModel::default();
        let d = 3.0;
        let p = det.pod_true(d);
        let z_iso = radio.path_loss(d).unwrap();
        let cfg = BoConfig::default();
        let mut st = BoState::new();
        for &s in grid.iter().step_by(3) {
            let p_tilde = if angular_distance(s, gamma) <= 3f64.to_radians() + 1e-9 { p } else { 0.0 };
            let z_dir = z_iso * radio.radiation_attenuation(s, gamma);
            let obs = build_observation(s, z_iso, z_dir, p_tilde, &constant_pod(p), &cfg).unwrap();
            st.observations.push(obs);
        }
        st.refit().unwrap();
        let g = estimate_gamma(&st, &grid).unwrap();
        assert!(angular_distance(g, gamma) <= spacing + 1e-12, "{g} vs {gamma}");
    }

    #[test]
    fn single_target_episode_is_always_correct() {
        let world = World::new(vec![Target::from_polar(3.0, 1.0).unwrap()], 0, 0.0).unwrap();
        let timing = TimingConfig {
            n_test: 15,
            ..TimingConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tr = run_episode(&world, &timing, &SensorModels::default(), &constant_pod(0.4), &BoConfig::default(), &mut rng)
            .unwrap();
        assert_eq!(tr.rows.len(), 15);
        assert!(tr.rows.iter().all(|r| r.tx_estimate == 0 && r.correct));
        assert!((tr.rows[14].t_seconds - 1.5).abs() < 1e-12);
        assert!(tr.rows.iter().all(|r| (-PI..PI).contains(&r.pan_rad)));
        assert_eq!(tr.rows[0].pan_rad, 0.0);
    }

    #[test]
    fn episodes_are_reproducible() {
        let mut wrng = ChaCha8Rng::seed_from_u64(1);
        let world = crate::world::spawn_world(5, (1.5, 5.5), 2f64.to_radians(), &mut wrng).unwrap();
        let timing = TimingConfig {
            n_test: 25,
            ..TimingConfig::default()
        };
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            run_episode(&world, &timing, &SensorModels::default(), &constant_pod(0.4), &BoConfig::default(), &mut rng)
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn variant_parsing() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("nope".parse::<Variant>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(BoConfig::default().validate().is_ok());
        assert!(BoConfig { zeta: 0.0, ..BoConfig::default() }.validate().is_err());
        assert!(BoConfig { grid_size: 4, ..BoConfig::default() }.validate().is_err());
        assert!(BoConfig { warmup_steps: 0, ..BoConfig::default() }.validate().is_err());
    }
}
