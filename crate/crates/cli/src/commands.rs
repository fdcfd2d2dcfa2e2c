use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use ra2vipas::bo::{run_episode, EpisodeTrace};
use ra2vipas::config::RunConfig;
use ra2vipas::gp::KernelSpec;
use ra2vipas::mc::{compare_variants, run_mc, write_report};
use ra2vipas::pod::{
    collect_training_dataset, default_eval_grid, fit_curve, pod_fit_options, r2_from_curve, train_pod_model_with,
    write_dataset_csv, write_fit_csv, PodModel,
};
use ra2vipas::seed::{rng_for, stream};
use ra2vipas::world::spawn_world;

use crate::args::Resolved;
use crate::plot;

/// Create `<root>/<command>-<unix seconds>-seed<seed>`, adding a numeric
/// suffix if that directory already exists.
pub fn create_run_dir(root: &Path, command: &str, seed: u64) -> Result<PathBuf> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let base = format!("{command}-{stamp}-seed{seed}");
    fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let mut dir = root.join(&base);
    let mut n = 1;
    loop {
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                dir = root.join(format!("{base}-{n}"));
                n += 1;
            }
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
}

fn write_config_echo(dir: &Path, cfg: &RunConfig) -> Result<()> {
    fs::write(dir.join("config.toml"), cfg.to_toml()).context("writing config echo")
}

fn write_summary(path: &Path, rows: &[(String, String)]) -> Result<()> {
    let mut s = String::from("metric,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub struct TrainedPod {
    pub model: PodModel<f64>,
    pub r2: f64,
}

/// Train and score the POD model, writing its artifacts into `dir`.
fn train_pod_into(cfg: &RunConfig, dir: &Path) -> Result<TrainedPod> {
    let mut rng = rng_for(cfg.seed, &[stream::POD_TRAINING]);
    let radio = cfg.radio();
    let det = cfg.detection();
    let motion = cfg.motion();
    let samples = collect_training_dataset(&radio, &det, &motion, &cfg.timing(), cfg.fov_half_width(), &mut rng)?;
    let (model, fit) = train_pod_model_with(&samples, &KernelSpec::matern52(1.0, 1.0), &pod_fit_options())?;
    let grid = default_eval_grid(&radio, &motion, cfg.pod_eval_points)?;
    let curve = fit_curve(&model, &det, &radio, &grid)?;
    let r2 = r2_from_curve(&curve)?;
    write_dataset_csv(&dir.join("pod_dataset.csv"), &samples)?;
    write_fit_csv(&dir.join("pod_fit.csv"), &curve)?;
    model.save_json(&dir.join("pod_model.json"))?;
    write_summary(
        &dir.join("pod_summary.csv"),
        &[
            ("n_train".into(), samples.len().to_string()),
            ("r2".into(), r2.to_string()),
            ("signal_var".into(), fit.signal_var.to_string()),
            ("lengthscale_dbm".into(), fit.lengthscale.to_string()),
            ("extra_noise_var".into(), fit.extra_noise.to_string()),
            ("log_marginal_likelihood".into(), fit.log_marginal_likelihood.to_string()),
        ],
    )?;
    if cfg.plots {
        plot::pod_fit(&dir.join("pod_fit.svg"), &samples, &curve, r2)?;
    }
    Ok(TrainedPod { model, r2 })
}

/// Load the POD model given on the command line, or train one into `dir`.
fn obtain_pod(res: &Resolved, dir: &Path) -> Result<(PodModel<f64>, Option<f64>)> {
    match &res.pod_model {
        Some(p) => {
            let model = PodModel::load_json(p).with_context(|| format!("loading POD model {}", p.display()))?;
            // Keep the run directory self-contained.
            model.save_json(&dir.join("pod_model.json"))?;
            let cfg = &res.config;
            let grid = default_eval_grid(&cfg.radio(), &cfg.motion(), cfg.pod_eval_points)?;
            let r2 = r2_from_curve(&fit_curve(&model, &cfg.detection(), &cfg.radio(), &grid)?)?;
            Ok((model, Some(r2)))
        }
        None => {
            let t = train_pod_into(&res.config, dir)?;
            Ok((t.model, Some(t.r2)))
        }
    }
}

pub fn train_pod(res: &Resolved) -> Result<PathBuf> {
    let dir = create_run_dir(&res.out_root, "train-pod", res.config.seed)?;
    write_config_echo(&dir, &res.config)?;
    let t = train_pod_into(&res.config, &dir)?;
    println!("POD R² = {:.4}", t.r2);
    Ok(dir)
}

pub fn run_single_episode(res: &Resolved) -> Result<PathBuf> {
    let cfg = &res.config;
    let dir = create_run_dir(&res.out_root, "run-episode", cfg.seed)?;
    write_config_echo(&dir, cfg)?;
    let (pod, pod_r2) = obtain_pod(res, &dir)?;
    let exp = cfg.experiment()?;
    let mut wrng = rng_for(cfg.seed, &ra2vipas::mc::ExperimentConfig::world_seed_path(0));
    let world = spawn_world(exp.n_targets, exp.spawn_distance, exp.eps_gamma, &mut wrng)?;

    let mut world_csv = String::from("index,distance_m,bearing_rad,is_tx\n");
    for (i, t) in world.targets().iter().enumerate() {
        let _ = writeln!(world_csv, "{i},{},{},{}", t.distance(), t.bearing(), u8::from(i == world.tx_index()));
    }
    fs::write(dir.join("world.csv"), world_csv)?;

    let mut summary = vec![
        ("tx_index".to_string(), world.tx_index().to_string()),
        ("pod_r2".to_string(), pod_r2.map(|r| r.to_string()).unwrap_or_default()),
    ];
    for v in cfg.variant_list()? {
        let mut rng = rng_for(cfg.seed, &ra2vipas::mc::ExperimentConfig::controller_seed_path(0, v));
        let trace: EpisodeTrace = run_episode(&world, &exp.timing, &exp.sensors, &pod, &cfg.bo(v), &mut rng)?;
        trace.write_csv(&dir.join(format!("trace_{}.csv", v.name())))?;
        let last = trace.rows.last().expect("episode has at least one step");
        summary.push((format!("final_correct_{}", v.name()), u8::from(last.correct).to_string()));
        summary.push((format!("final_gamma_hat_{}", v.name()), last.gamma_hat_rad.to_string()));
        if cfg.plots {
            plot::episode(
                &dir.join(format!("episode_{}.svg", v.name())),
                &trace,
                world.tx().bearing(),
                &format!("{} episode", v.name()),
            )?;
        }
        println!("{v}: final estimate {} (transmitter {})", last.tx_estimate, world.tx_index());
    }
    write_summary(&dir.join("summary.csv"), &summary)?;
    Ok(dir)
}

pub fn run_monte_carlo(res: &Resolved) -> Result<PathBuf> {
    let cfg = &res.config;
    let dir = create_run_dir(&res.out_root, "run-mc", cfg.seed)?;
    write_config_echo(&dir, cfg)?;
    let (pod, pod_r2) = obtain_pod(res, &dir)?;
    let report = run_mc(&cfg.experiment()?, &pod, pod_r2)?;
    write_report(&dir, &report)?;
    if cfg.plots {
        plot::dr_series(&dir.join("dr_series.svg"), &report.series)?;
    }
    let cmp = compare_variants(&report);
    for (v, d) in &cmp.final_dr {
        println!("{v}: final DR {d:.3}");
    }
    let failures = report.failures().count();
    if failures > 0 {
        eprintln!("warning: {failures} episode(s) failed and were scored as never correct");
    }
    Ok(dir)
}
