//! Flat key/value run configuration.
//!
//! One TOML table with scalar keys. Values resolve as: explicit overrides,
//! then the config file, then the built-in defaults. Every problem is
//! reported against the offending key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bo::{BoConfig, SensorModels, Variant};
use crate::error::{Error, Result};
use crate::mc::ExperimentConfig;
use crate::world::{DetectionModel, RadioModel, TargetMotionModel, TimingConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Parent directory for run directories. Empty means unset.
    pub out_dir: String,
    pub plots: bool,
    /// Worker threads for the Monte Carlo runner; 0 lets the runtime decide.
    pub threads: usize,

    pub t_rf: f64,
    pub nu: usize,
    pub n_test: usize,
    pub n_train: usize,
    pub n_tests: usize,
    pub n_targets: usize,

    pub kappa: f64,
    pub n_exp: f64,
    pub delta: f64,
    pub sigma_rf: f64,
    pub atten_coeff: f64,

    pub pod_slope_far: f64,
    pub pod_center_far: f64,
    pub pod_slope_near: f64,
    pub pod_center_near: f64,

    pub motion_noise_var: f64,
    pub motion_d_min: f64,
    pub motion_d_max: f64,

    pub fov_half_width_deg: f64,
    pub spawn_d_min: f64,
    pub spawn_d_max: f64,
    pub eps_gamma_deg: f64,

    pub beta: f64,
    pub zeta: f64,
    pub grid_size: usize,
    pub warmup_steps: usize,
    pub refit_every: usize,
    /// Comma-separated subset of `ra2vipas,rapas,ravipas`.
    pub variants: String,

    /// RSSI grid size for the POD fit curve and its R².
    pub pod_eval_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let timing = TimingConfig::default();
        let radio = RadioModel::<f64>::default();
        let det = DetectionModel::<f64>::default();
        let motion = TargetMotionModel::<f64>::default();
        let bo = BoConfig::default();
        let exp = ExperimentConfig::default();
        Self {
            seed: 0,
            out_dir: String::new(),
            plots: false,
            threads: 0,
            t_rf: timing.t_rf,
            nu: timing.nu,
            n_test: timing.n_test,
            n_train: timing.n_train,
            n_tests: exp.n_tests,
            n_targets: exp.n_targets,
            kappa: radio.kappa,
            n_exp: radio.n_exp,
            delta: radio.delta,
            sigma_rf: radio.sigma_rf,
            atten_coeff: radio.atten_coeff,
            pod_slope_far: det.slope_far,
            pod_center_far: det.center_far,
            pod_slope_near: det.slope_near,
            pod_center_near: det.center_near,
            motion_noise_var: motion.noise_var,
            motion_d_min: motion.d_min,
            motion_d_max: motion.d_max,
            fov_half_width_deg: bo.fov_half_width.to_degrees(),
            spawn_d_min: exp.spawn_distance.0,
            spawn_d_max: exp.spawn_distance.1,
            eps_gamma_deg: exp.eps_gamma.to_degrees(),
            beta: bo.beta,
            zeta: bo.zeta,
            grid_size: bo.grid_size,
            warmup_steps: bo.warmup_steps,
            refit_every: bo.refit_every,
            variants: "ra2vipas,rapas,ravipas".into(),
            pod_eval_points: 200,
        }
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn to_table(cfg: &RunConfig) -> toml::Table {
    toml::Table::try_from(cfg).expect("run config serializes to a table")
}

impl RunConfig {
    /// Every accepted key, in declaration order of the echo.
    pub fn keys() -> Vec<String> {
        to_table(&Self::default()).keys().cloned().collect()
    }

    /// Defaults overlaid with the file at `path`, if any.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            cfg.merge_toml(&text)?;
        }
        Ok(cfg)
    }

    /// Overlay the keys of a TOML document.
    pub fn merge_toml(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| config_err("<file>", e.message().to_string()))?;
        for (k, v) in table {
            self.set_value(&k, v)?;
        }
        Ok(())
    }

    /// Set one key from its textual form; bare words are taken as strings.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        self.set_value(key, value)
    }

    fn set_value(&mut self, key: &str, value: toml::Value) -> Result<()> {
        let mut table = to_table(self);
        let current = table
            .get(key)
            .ok_or_else(|| config_err(key, "unknown key"))?;
        let value = match (current, value) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (toml::Value::String(_), toml::Value::Integer(i)) => toml::Value::String(i.to_string()),
            (toml::Value::String(_), toml::Value::Array(a)) => toml::Value::String(
                a.iter()
                    .map(|x| x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string()))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (_, v) => v,
        };
        if std::mem::discriminant(current) != std::mem::discriminant(&value) {
            return Err(config_err(
                key,
                format!("expected a {}, got `{value}`", current.type_str()),
            ));
        }
        table.insert(key.to_string(), value);
        *self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| config_err(key, e.message().to_string()))?;
        Ok(())
    }

    /// Check every value, naming the first offending key.
    pub fn validate(&self) -> Result<()> {
        let named = |e: Error| match e {
            Error::OutOfRange { name, value, reason } => config_err(name, format!("{value} is out of range: {reason}")),
            other => other,
        };
        self.timing().validate().map_err(named)?;
        self.radio().validate().map_err(named)?;
        self.motion().validate().map_err(named)?;
        self.bo(Variant::Ra2ViPAS).validate().map_err(|e| match e {
            Error::OutOfRange {
                name: "fov_half_width",
                value,
                reason,
            } => config_err("fov_half_width_deg", format!("{} is out of range: {reason}", value.to_degrees())),
            e => named(e),
        })?;
        self.variant_list()?;
        if self.n_tests == 0 {
            return Err(config_err("n_tests", "must be at least 1"));
        }
        if self.n_targets == 0 {
            return Err(config_err("n_targets", "must be at least 1"));
        }
        if !(self.spawn_d_min > 0.0 && self.spawn_d_min <= self.spawn_d_max && self.spawn_d_max.is_finite()) {
            return Err(config_err("spawn_d_min", "need 0 < spawn_d_min <= spawn_d_max"));
        }
        if !(self.eps_gamma_deg >= 0.0 && self.eps_gamma_deg.is_finite()) {
            return Err(config_err("eps_gamma_deg", "must be finite and non-negative"));
        }
        if self.n_targets as f64 * self.eps_gamma_deg.to_radians() >= std::f64::consts::TAU {
            return Err(config_err("eps_gamma_deg", "n_targets * eps_gamma must stay below a full turn"));
        }
        let sigmoid = [
            ("pod_slope_far", self.pod_slope_far),
            ("pod_center_far", self.pod_center_far),
            ("pod_slope_near", self.pod_slope_near),
            ("pod_center_near", self.pod_center_near),
            ("kappa", self.kappa),
            ("n_exp", self.n_exp),
        ];
        if let Some((k, _)) = sigmoid.iter().find(|(_, v)| !v.is_finite()) {
            return Err(config_err(k, "must be finite"));
        }
        if self.n_exp <= 0.0 {
            return Err(config_err("n_exp", "must be positive"));
        }
        if self.pod_eval_points < 2 {
            return Err(config_err("pod_eval_points", "must be at least 2"));
        }
        Ok(())
    }

    pub fn variant_list(&self) -> Result<Vec<Variant>> {
        let mut out = Vec::new();
        for part in self.variants.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.push(part.parse::<Variant>()?);
        }
        if out.is_empty() {
            return Err(config_err("variants", "select at least one variant"));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn timing(&self) -> TimingConfig {
        TimingConfig {
            t_rf: self.t_rf,
            nu: self.nu,
            n_test: self.n_test,
            n_train: self.n_train,
        }
    }

    pub fn radio(&self) -> RadioModel<f64> {
        RadioModel {
            kappa: self.kappa,
            n_exp: self.n_exp,
            delta: self.delta,
            sigma_rf: self.sigma_rf,
            atten_coeff: self.atten_coeff,
        }
    }

    pub fn detection(&self) -> DetectionModel<f64> {
        DetectionModel {
            slope_far: self.pod_slope_far,
            center_far: self.pod_center_far,
            slope_near: self.pod_slope_near,
            center_near: self.pod_center_near,
        }
    }

    pub fn motion(&self) -> TargetMotionModel<f64> {
        TargetMotionModel {
            noise_var: self.motion_noise_var,
            d_min: self.motion_d_min,
            d_max: self.motion_d_max,
        }
    }

    pub fn sensors(&self) -> SensorModels {
        SensorModels {
            radio: self.radio(),
            detection: self.detection(),
        }
    }

    pub fn fov_half_width(&self) -> f64 {
        self.fov_half_width_deg.to_radians()
    }

    pub fn bo(&self, variant: Variant) -> BoConfig {
        BoConfig {
            beta: self.beta,
            zeta: self.zeta,
            grid_size: self.grid_size,
            warmup_steps: self.warmup_steps,
            refit_every: self.refit_every,
            variant,
            fov_half_width: self.fov_half_width(),
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            n_tests: self.n_tests,
            n_targets: self.n_targets,
            timing: self.timing(),
            spawn_distance: (self.spawn_d_min, self.spawn_d_max),
            eps_gamma: self.eps_gamma_deg.to_radians(),
            sensors: self.sensors(),
            bo: self.bo(Variant::Ra2ViPAS),
            variants: self.variant_list()?,
            master_seed: self.seed,
            threads: self.threads,
        })
    }

    /// The resolved configuration as a TOML document.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_table_defaults() {
        let mut c = RunConfig::default();
        c.merge_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.t_rf, c.nu, c.n_train, c.n_test, c.n_tests, c.n_targets), (0.1, 10, 900, 120, 50, 20));
        assert_eq!((c.kappa, c.n_exp, c.delta, c.sigma_rf), (-30.0, 2.0, 1.0, 3.0));
        assert_eq!(c.motion_noise_var, 0.04);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn overrides_and_integer_floats() {
        let mut c = RunConfig::default();
        c.set("sigma_rf", "0").unwrap();
        assert_eq!(c.radio().sigma_rf, 0.0);
        c.merge_toml("beta = 2\nvariants = [\"rapas\"]\n").unwrap();
        assert_eq!(c.beta, 2.0);
        assert_eq!(c.variant_list().unwrap(), vec![Variant::RaPAS]);
        c.set("variants", "rapas,ra2vipas").unwrap();
        assert_eq!(c.variant_list().unwrap(), vec![Variant::Ra2ViPAS, Variant::RaPAS]);
        c.set("out_dir", "/tmp/x").unwrap();
        assert_eq!(c.out_dir, "/tmp/x");
    }

    #[test]
    fn errors_name_the_key() {
        let key_of = |e: Error| match e {
            Error::Config { key, .. } => key,
            other => panic!("unexpected {other}"),
        };
        let mut c = RunConfig::default();
        assert_eq!(key_of(c.set("no_such_key", "1").unwrap_err()), "no_such_key");
        assert_eq!(key_of(c.set("nu", "ten").unwrap_err()), "nu");
        assert_eq!(key_of(c.set("nu", "-1").unwrap_err()), "nu");
        c.set("nu", "0").unwrap();
        assert_eq!(key_of(c.validate().unwrap_err()), "nu");
        let mut c = RunConfig::default();
        c.set("variants", "foo").unwrap();
        assert_eq!(key_of(c.validate().unwrap_err()), "variants");
        let mut c = RunConfig::default();
        c.set("fov_half_width_deg", "200").unwrap();
        assert_eq!(key_of(c.validate().unwrap_err()), "fov_half_width_deg");
        let mut c = RunConfig::default();
        assert_eq!(key_of(c.merge_toml("zeta = 1\nbogus = 2").unwrap_err()), "bogus");
        assert!(c.merge_toml("zeta = = 1").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.set("seed", "7").unwrap();
        c.set("plots", "true").unwrap();
        let mut back = RunConfig::default();
        back.merge_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert!(RunConfig::keys().contains(&"refit_every".to_string()));
    }

    #[test]
    fn experiment_mirrors_keys() {
        let mut c = RunConfig::default();
        c.set("n_tests", "3").unwrap();
        c.set("beta", "1.5").unwrap();
        let e = c.experiment().unwrap();
        assert_eq!(e.n_tests, 3);
        assert_eq!(e.bo.beta, 1.5);
        assert_eq!(e.variants.len(), 3);
        assert!((e.eps_gamma - 2f64.to_radians()).abs() < 1e-15);
        assert!((c.fov_half_width() - 15f64.to_radians()).abs() < 1e-15);
    }
}
