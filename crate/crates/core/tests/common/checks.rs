//! Checks shared by the integration tests and the acceptance report.

use std::f64::consts::PI;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};
use ra2vipas::bo::{associate_tx, build_observation, pan_grid, ucb_acquisition, argmax_first, embed, BoConfig, Variant};
use ra2vipas::config::RunConfig;
use ra2vipas::gp::{GpDataset, GpModel, KernelSpec, Noise, NOISE_FLOOR};
use ra2vipas::linalg::Matrix;
use ra2vipas::pod::{collect_training_dataset, default_eval_grid, evaluate_pod_fit, train_pod_model, PodModel};
use ra2vipas::seed::{rng_for, stream};
use ra2vipas::world::{
    detect_frame, spawn_world, wrap, DetectionModel, PlatformState, RadioModel, Target, TargetMotionModel, World,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn to_matrix(rows: &[Vec<f64>]) -> Matrix<f64> {
    let p = rows.first().map_or(1, Vec::len);
    Matrix::from_fn(rows.len(), p, |i, j| rows[i][j])
}

/// Largest relative disagreement between the crate's GP and the dense
/// oracle over `instances` random problems with `n ≤ 6`, `p ≤ 2`.
pub fn gp_oracle_max_error(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.gen_range(1..=6);
        let p = rng.gen_range(1..=2);
        let m = rng.gen_range(1..=4);
        let point = |rng: &mut ChaCha8Rng| (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<f64>>();
        let x: Vec<Vec<f64>> = (0..n).map(|_| point(&mut rng)).collect();
        let test: Vec<Vec<f64>> = (0..m).map(|_| point(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-3..0.5)).collect();
        let sv = rng.gen_range(0.5..2.0);
        let ls = rng.gen_range(0.3..3.0);
        let mean = rng.gen_range(-1.0..1.0);

        let ds = GpDataset::new(to_matrix(&x), y.clone(), Noise::PerPoint(noise.clone())).unwrap();
        let model = GpModel::new(KernelSpec::matern52(sv, ls), mean, ds).unwrap();
        let pred = model.posterior_predict(&to_matrix(&test)).unwrap();
        let lml = model.log_marginal_likelihood().unwrap();

        let diag: Vec<f64> = noise.iter().map(|v| v + NOISE_FLOOR + model.jitter()).collect();
        let dense = oracle::posterior(&x, &y, &diag, mean, sv, ls, &test);
        for a in 0..m {
            worst = worst.max(rel_err(pred.mean[a], dense.mean[a]));
            for b in 0..m {
                worst = worst.max(rel_err(pred.cov.get(a, b), dense.cov[a][b]));
            }
        }
        worst = worst.max(rel_err(lml, dense.lml));
    }
    worst
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

pub fn prop_wrap() -> Result<(), String> {
    check(512, -1.0e4..1.0e4f64, |theta| {
        let w = wrap(theta);
        prop_assert!((-PI..PI).contains(&w), "wrap({theta}) = {w}");
        let turns = (theta - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() <= 1e-9 * theta.abs().max(1.0));
        prop_assert_eq!(wrap(w), w);
        Ok(())
    })
}

pub fn prop_clamp() -> Result<(), String> {
    let s = (-50.0..50.0f64, -50.0..50.0f64, 0.0..5.0f64, -20.0..30.0f64, 0.0..50.0f64);
    check(512, s, |(pan, bearing, c, d, dist)| {
        let radio = RadioModel {
            atten_coeff: c,
            ..RadioModel::default()
        };
        let rho = radio.radiation_attenuation(pan, bearing);
        prop_assert!((0.0..=1.0).contains(&rho), "rho = {rho}");
        prop_assert_eq!(radio.radiation_attenuation(bearing, bearing), 1.0);
        let motion = TargetMotionModel::<f64>::default();
        let r = motion.reflect(d);
        prop_assert!(r >= motion.d_min && r <= motion.d_max, "reflect({d}) = {r}");
        let p = DetectionModel::<f64>::default().pod_true(dist);
        prop_assert!((0.0..=1.0).contains(&p));
        Ok(())
    })
}

fn dataset_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>, f64, f64)> {
    (1usize..=6, 1usize..=2).prop_flat_map(|(n, p)| {
        (
            vec(vec(-3.0..3.0f64, p), n),
            vec(-2.0..2.0f64, n),
            vec(vec(-4.0..4.0f64, p), 1..5),
            0.3..2.0f64,
            0.2..3.0f64,
        )
    })
}

pub fn prop_posterior_variance() -> Result<(), String> {
    let s = (dataset_strategy(), 0.0..0.5f64);
    check(256, s, |((x, y, test, sv, ls), noise)| {
        let ds = GpDataset::new(to_matrix(&x), y, Noise::Homoscedastic(noise)).unwrap();
        let model = GpModel::new(KernelSpec::matern52(sv, ls), 0.0, ds).unwrap();
        let pred = model.posterior_predict(&to_matrix(&test)).unwrap();
        for i in 0..test.len() {
            prop_assert!(pred.cov.get(i, i) <= sv + 1e-10, "{} > {sv}", pred.cov.get(i, i));
        }
        Ok(())
    })
}

pub fn prop_permutation_invariance() -> Result<(), String> {
    let s = dataset_strategy().prop_flat_map(|d| {
        let idx: Vec<usize> = (0..d.0.len()).collect();
        (Just(d), Just(idx).prop_shuffle())
    });
    check(256, s, |((x, y, test, sv, ls), perm)| {
        let predict = |x: &[Vec<f64>], y: Vec<f64>| {
            let ds = GpDataset::new(to_matrix(x), y, Noise::Homoscedastic(0.05)).unwrap();
            GpModel::new(KernelSpec::matern52(sv, ls), 0.1, ds)
                .unwrap()
                .posterior_predict(&to_matrix(&test))
                .unwrap()
        };
        let a = predict(&x, y.clone());
        let xp: Vec<Vec<f64>> = perm.iter().map(|&i| x[i].clone()).collect();
        let b = predict(&xp, perm.iter().map(|&i| y[i]).collect());
        for i in 0..test.len() {
            prop_assert!((a.mean[i] - b.mean[i]).abs() <= 1e-10);
            for j in 0..test.len() {
                prop_assert!((a.cov.get(i, j) - b.cov.get(i, j)).abs() <= 1e-10);
            }
        }
        Ok(())
    })
}

fn constant_pod(p: f64) -> PodModel<f64> {
    let gp = GpModel::new(KernelSpec::matern52(1e-6, 1.0), p, GpDataset::empty(1, 0.0)).unwrap();
    PodModel::from_gp(gp).unwrap()
}

pub fn prop_variant_algebra() -> Result<(), String> {
    let s = (0.0..1.0f64, 0usize..=10, -90.0..-20.0f64, -90.0..10.0f64, 1.0..100.0f64);
    check(512, s, |(p_hat, k, z_iso, z_dir, zeta)| {
        let pod = constant_pod(p_hat);
        let p_tilde = k as f64 / 10.0;
        let obs = |v: Variant| {
            let cfg = BoConfig {
                zeta,
                ..BoConfig::default().with_variant(v)
            };
            build_observation(0.3, z_iso, z_dir, p_tilde, &pod, &cfg).unwrap()
        };
        let full = obs(Variant::Ra2ViPAS);
        prop_assert!(full.y_d <= 0.0 && full.y_rf >= 0.0);
        prop_assert_eq!(full.y, full.y_d * full.y_rf);
        prop_assert_eq!(full.y_d, -(p_hat - p_tilde).abs());
        prop_assert_eq!(full.y_rf, z_dir.abs() / zeta);
        prop_assert_eq!(obs(Variant::RaPAS).y, full.y_rf);
        prop_assert_eq!(obs(Variant::RaViPAS).y, full.y_d);
        Ok(())
    })
}

fn brute_force_nearest(gamma: f64, world: &World<f64>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, t) in world.targets().iter().enumerate() {
        let raw = (gamma - t.bearing()).rem_euclid(2.0 * PI);
        let d = raw.min(2.0 * PI - raw);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Association against a brute-force scan on `cases` random pairs.
pub fn prop_association(cases: u32) -> Result<(), String> {
    let s = (any::<u64>(), 1usize..=30, -PI..PI);
    check(cases, s, |(seed, n, gamma)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let world = spawn_world(n, (1.5, 5.5), 2f64.to_radians(), &mut rng).unwrap();
        let got = associate_tx(gamma, &world);
        let want = brute_force_nearest(gamma, &world);
        if got != want {
            // Only a floating-point tie may disagree.
            let dist = |i: usize| (gamma - world.targets()[i].bearing()).rem_euclid(2.0 * PI);
            let (a, b) = (dist(got).min(2.0 * PI - dist(got)), dist(want).min(2.0 * PI - dist(want)));
            prop_assert!((a - b).abs() <= 1e-12, "got {got} ({a}), want {want} ({b})");
        }
        Ok(())
    })
}

pub fn prop_ucb_shift() -> Result<(), String> {
    let s = (vec((-PI..PI, -1.0..1.0f64), 1..12), -5.0..5.0f64);
    check(128, s, |(obs, c)| {
        let grid = pan_grid(72);
        let acq = |shift: f64| {
            let x = Matrix::from_fn(obs.len(), 2, |i, j| embed(obs[i].0)[j]);
            let y = obs.iter().map(|o| o.1 + shift).collect();
            let ds = GpDataset::new(x, y, Noise::Homoscedastic(0.01)).unwrap();
            let gp = GpModel::new(KernelSpec::matern52(1.0, 0.5), shift, ds).unwrap();
            ucb_acquisition(&gp, &grid, 4.0).unwrap()
        };
        let (a, b) = (acq(0.0), acq(c));
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u + c - v).abs() <= 1e-9);
        }
        let (ia, ib) = (argmax_first(&a).unwrap(), argmax_first(&b).unwrap());
        // The argmax may only move between values equal up to rounding.
        prop_assert!(ia == ib || (a[ia] - a[ib]).abs() <= 1e-9);
        Ok(())
    })
}

/// Every property with its name, in a fixed order.
pub fn property_suite() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("wrap", prop_wrap()),
        ("clamp and bounds", prop_clamp()),
        ("posterior variance <= prior", prop_posterior_variance()),
        ("permutation invariance", prop_permutation_invariance()),
        ("variant algebra", prop_variant_algebra()),
        ("association vs brute force (1000 pairs)", prop_association(1000)),
        ("UCB shift invariance", prop_ucb_shift()),
    ]
}

pub struct LabelStats {
    pub p: f64,
    pub mean: f64,
    pub var: f64,
    pub windows: usize,
    pub nu: usize,
}

impl LabelStats {
    pub fn expected_var(&self) -> f64 {
        self.p * (1.0 - self.p) / self.nu as f64
    }
}

/// Empirical POD labels over `windows` windows of `nu` frames with the
/// target frozen at distance `d` in the middle of the view.
pub fn label_stats(d: f64, windows: usize, nu: usize, seed: u64) -> LabelStats {
    let det = DetectionModel::default();
    let world = World::new(vec![Target::from_polar(d, 0.0).unwrap()], 0, 0.0).unwrap();
    let platform = PlatformState::new(0.0, 15f64.to_radians()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<f64> = (0..windows)
        .map(|_| (0..nu).filter(|_| detect_frame(&world, &platform, &det, &mut rng)[0]).count() as f64 / nu as f64)
        .collect();
    let mean = labels.iter().sum::<f64>() / windows as f64;
    let var = labels.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (windows - 1) as f64;
    LabelStats {
        p: det.pod_true(d),
        mean,
        var,
        windows,
        nu,
    }
}

/// R² of a POD model trained with the default configuration and `seed`,
/// through the same streams the command line uses.
pub fn pod_r2(seed: u64) -> f64 {
    let cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let mut rng = rng_for(seed, &[stream::POD_TRAINING]);
    let samples = collect_training_dataset(
        &cfg.radio(),
        &cfg.detection(),
        &cfg.motion(),
        &cfg.timing(),
        cfg.fov_half_width(),
        &mut rng,
    )
    .unwrap();
    let model = train_pod_model(&samples, &KernelSpec::matern52(1.0, 1.0)).unwrap();
    let grid = default_eval_grid(&cfg.radio(), &cfg.motion(), cfg.pod_eval_points).unwrap();
    evaluate_pod_fit(&model, &cfg.detection(), &cfg.radio(), &grid).unwrap()
}
