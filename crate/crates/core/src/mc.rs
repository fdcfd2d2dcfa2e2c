//! Monte Carlo discovery experiments.
//!
//! Every test spawns one world and runs each selected controller variant on
//! it. The Discovery Rate at step `t` is the fraction of tests whose
//! associated target at `t` is the transmitter.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bo::{run_episode, BoConfig, EpisodeTrace, SensorModels, Variant};
use crate::error::{Error, Result};
use crate::pod::PodModel;
use crate::seed::{rng_for, stream};
use crate::world::{spawn_world, TimingConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_tests: usize,
    pub n_targets: usize,
    pub timing: TimingConfig,
    /// Spawn distance range in meters.
    pub spawn_distance: (f64, f64),
    /// Minimum pairwise bearing separation in radians.
    pub eps_gamma: f64,
    pub sensors: SensorModels,
    /// Shared controller settings; `variant` is overridden per run.
    pub bo: BoConfig,
    pub variants: Vec<Variant>,
    pub master_seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_tests: 50,
            n_targets: 20,
            timing: TimingConfig::default(),
            spawn_distance: (1.5, 5.5),
            eps_gamma: 2f64.to_radians(),
            sensors: SensorModels::default(),
            bo: BoConfig::default(),
            variants: Variant::ALL.to_vec(),
            master_seed: 0,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tests < 1 {
            return Err(Error::OutOfRange {
                name: "n_tests",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.variants.is_empty() {
            return Err(Error::InsufficientData("no controller variant selected"));
        }
        self.timing.validate()?;
        self.bo.validate()?;
        self.sensors.radio.validate()
    }

    /// Selected variants, deduplicated, in canonical order.
    pub fn variants_sorted(&self) -> Vec<Variant> {
        let mut v = self.variants.clone();
        v.sort();
        v.dedup();
        v
    }

    pub fn world_seed_path(test: usize) -> [u64; 2] {
        [stream::WORLD, test as u64]
    }

    pub fn controller_seed_path(test: usize, variant: Variant) -> [u64; 3] {
        [stream::CONTROLLER, test as u64, variant.id()]
    }
}

/// Column means of a rectangular boolean matrix (one row per test).
pub fn discovery_rate(indicators: &[Vec<bool>]) -> Result<Vec<f64>> {
    let first = indicators
        .first()
        .ok_or(Error::InsufficientData("indicator matrix is empty"))?;
    let cols = first.len();
    if let Some(bad) = indicators.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch {
            expected: cols,
            got: bad.len(),
        });
    }
    let mut counts = vec![0usize; cols];
    for row in indicators {
        for (c, &b) in counts.iter_mut().zip(row) {
            *c += usize::from(b);
        }
    }
    let n = indicators.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Discovery Rate per step for each variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrSeries {
    pub times: Vec<f64>,
    pub dr: Vec<(Variant, Vec<f64>)>,
}

impl DrSeries {
    pub fn get(&self, v: Variant) -> Option<&[f64]> {
        self.dr.iter().find(|(w, _)| *w == v).map(|(_, d)| d.as_slice())
    }

    pub fn final_dr(&self, v: Variant) -> Option<f64> {
        self.get(v).and_then(|d| d.last().copied())
    }
}

/// Outcome of one variant on one test world.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub test: usize,
    pub variant: Variant,
    pub tx_index: usize,
    pub result: std::result::Result<EpisodeTrace, String>,
}

impl EpisodeOutcome {
    /// Per-step indicators; a failed episode is wrong at every step.
    pub fn indicators(&self, n_steps: usize) -> Vec<bool> {
        match &self.result {
            Ok(t) => t.indicators(),
            Err(_) => vec![false; n_steps],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub config: ExperimentConfig,
    pub series: DrSeries,
    pub outcomes: Vec<EpisodeOutcome>,
    pub pod_r2: Option<f64>,
}

impl McReport {
    pub fn failures(&self) -> impl Iterator<Item = &EpisodeOutcome> {
        self.outcomes.iter().filter(|o| o.result.is_err())
    }
}

fn run_test(cfg: &ExperimentConfig, variants: &[Variant], pod: &PodModel<f64>, test: usize) -> Vec<EpisodeOutcome> {
    let mut wrng = rng_for(cfg.master_seed, &ExperimentConfig::world_seed_path(test));
    let world = spawn_world(cfg.n_targets, cfg.spawn_distance, cfg.eps_gamma, &mut wrng);
    variants
        .iter()
        .map(|&variant| {
            let (tx_index, result) = match &world {
                Ok(w) => {
                    let mut rng = rng_for(cfg.master_seed, &ExperimentConfig::controller_seed_path(test, variant));
                    let bo = cfg.bo.with_variant(variant);
                    let r = run_episode(w, &cfg.timing, &cfg.sensors, pod, &bo, &mut rng).map_err(|e| e.to_string());
                    (w.tx_index(), r)
                }
                Err(e) => (0, Err(e.to_string())),
            };
            EpisodeOutcome {
                test,
                variant,
                tx_index,
                result,
            }
        })
        .collect()
}

/// Run every test and variant, in parallel over tests.
pub fn run_mc(cfg: &ExperimentConfig, pod: &PodModel<f64>, pod_r2: Option<f64>) -> Result<McReport> {
    cfg.validate()?;
    let variants = cfg.variants_sorted();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Infeasible(format!("cannot start worker pool: {e}")))?;
    let per_test: Vec<Vec<EpisodeOutcome>> = pool.install(|| {
        (0..cfg.n_tests)
            .into_par_iter()
            .map(|t| run_test(cfg, &variants, pod, t))
            .collect()
    });
    let outcomes: Vec<EpisodeOutcome> = per_test.into_iter().flatten().collect();
    let n_steps = cfg.timing.n_test;
    let mut dr = Vec::with_capacity(variants.len());
    for &v in &variants {
        let rows: Vec<Vec<bool>> = outcomes
            .iter()
            .filter(|o| o.variant == v)
            .map(|o| o.indicators(n_steps))
            .collect();
        dr.push((v, discovery_rate(&rows)?));
    }
    let times = (0..n_steps).map(|k| cfg.timing.rf_time(k)).collect();
    Ok(McReport {
        config: cfg.clone(),
        series: DrSeries { times, dr },
        outcomes,
        pod_r2,
    })
}

/// First time at which the series reaches half its final value. `None`
/// when the final value is zero.
pub fn time_to_half_final(times: &[f64], dr: &[f64]) -> Option<f64> {
    let last = *dr.last()?;
    if last <= 0.0 {
        return None;
    }
    dr.iter().zip(times).find(|(&d, _)| d >= 0.5 * last).map(|(_, &t)| t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantComparison {
    pub final_dr: Vec<(Variant, f64)>,
    pub time_to_half_final: Vec<(Variant, Option<f64>)>,
    /// Final-DR margin of Ra²ViPAS over RaPAS, when both ran.
    pub margin_over_rapas: Option<f64>,
    /// Final-DR margin of Ra²ViPAS over RaViPAS, when both ran.
    pub margin_over_ravipas: Option<f64>,
}

pub fn compare_variants(report: &McReport) -> VariantComparison {
    let s = &report.series;
    let final_dr: Vec<(Variant, f64)> = s.dr.iter().filter_map(|(v, d)| d.last().map(|&x| (*v, x))).collect();
    let time_to_half_final = s.dr.iter().map(|(v, d)| (*v, time_to_half_final(&s.times, d))).collect();
    let margin = |other| Some(s.final_dr(Variant::Ra2ViPAS)? - s.final_dr(other)?);
    VariantComparison {
        final_dr,
        time_to_half_final,
        margin_over_rapas: margin(Variant::RaPAS),
        margin_over_ravipas: margin(Variant::RaViPAS),
    }
}

/// `dr_series.csv`: time plus one column per selected variant.
pub fn write_dr_series_csv(path: &Path, series: &DrSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t_seconds".to_string()];
    header.extend(series.dr.iter().map(|(v, _)| format!("dr_{}", v.name())));
    w.write_record(&header)?;
    for (k, t) in series.times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(series.dr.iter().map(|(_, d)| d[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `summary.csv`: `metric,value` rows; missing values are left empty.
pub fn write_summary_csv(path: &Path, report: &McReport) -> Result<()> {
    let cmp = compare_variants(report);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut rows: Vec<(String, String)> = vec![
        ("n_tests".into(), report.config.n_tests.to_string()),
        ("n_test".into(), report.config.timing.n_test.to_string()),
        ("n_targets".into(), report.config.n_targets.to_string()),
        ("master_seed".into(), report.config.master_seed.to_string()),
    ];
    for (v, d) in &cmp.final_dr {
        rows.push((format!("final_dr_{}", v.name()), d.to_string()));
    }
    for (v, t) in &cmp.time_to_half_final {
        rows.push((format!("time_to_half_final_dr_{}", v.name()), opt(*t)));
    }
    rows.push(("margin_ra2vipas_over_rapas".into(), opt(cmp.margin_over_rapas)));
    rows.push(("margin_ra2vipas_over_ravipas".into(), opt(cmp.margin_over_ravipas)));
    rows.push(("failed_episodes".into(), report.failures().count().to_string()));
    rows.push(("pod_r2".into(), opt(report.pod_r2)));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["metric", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `dr_series.csv`, `summary.csv` and `traces/test_XXX_<variant>.csv`
/// into `dir`. Failed episodes get no trace file.
pub fn write_report(dir: &Path, report: &McReport) -> Result<()> {
    fs::create_dir_all(dir.join("traces"))?;
    write_dr_series_csv(&dir.join("dr_series.csv"), &report.series)?;
    write_summary_csv(&dir.join("summary.csv"), report)?;
    for o in &report.outcomes {
        if let Ok(trace) = &o.result {
            let name = format!("test_{:03}_{}.csv", o.test, o.variant.name());
            trace.write_csv(&dir.join("traces").join(name))?;
        }
    }
    Ok(())
}
