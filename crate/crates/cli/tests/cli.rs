use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ra2vipas"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RA2VIPAS_OUT")
        .output()
        .expect("binary runs")
}

fn only_run_dir(root: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|x| x == "csv") {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn small_run_is_fast_and_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let o = run(tmp.path(), &["run-mc", "--seed", "5", "--n-tests", "2", "--n-test", "10"]);
    let secs = start.elapsed().as_secs_f64();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(secs < 5.0, "took {secs:.1} s");
    let dir = only_run_dir(tmp.path());
    for f in ["config.toml", "dr_series.csv", "summary.csv", "pod_model.json", "pod_fit.csv"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    assert_eq!(fs::read_dir(dir.join("traces")).unwrap().count(), 6);
    let series = fs::read_to_string(dir.join("dr_series.csv")).unwrap();
    assert_eq!(series.lines().count(), 11);
}

#[test]
fn same_seed_gives_identical_csvs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["run-mc", "--seed", "11", "--n-tests", "3", "--n-test", "15"];
    assert!(run(a.path(), &args).status.success());
    assert!(run(b.path(), &args).status.success());
    let (da, db) = (only_run_dir(a.path()), only_run_dir(b.path()));
    let (fa, fb) = (csv_files(&da), csv_files(&db));
    assert_eq!(fa.len(), fb.len());
    assert!(!fa.is_empty());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.strip_prefix(&da).unwrap(), y.strip_prefix(&db).unwrap());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{} differs", x.display());
    }
}

#[test]
fn variant_selection_limits_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["run-mc", "--variants", "rapas", "--n-tests", "1", "--n-test", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(only_run_dir(tmp.path()).join("dr_series.csv")).unwrap();
    assert_eq!(series.lines().next().unwrap(), "t_seconds,dr_rapas");
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["run-mc", "--nu", "0"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nu"));
    assert_eq!(fs::read_dir(tmp.path()).map_or(0, |d| d.count()), 0);
}

#[test]
fn saved_pod_model_is_reused() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["train-pod", "--seed", "2", "--n-train", "100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let model = only_run_dir(tmp.path()).join("pod_model.json");
    let out2 = tmp.path().join("episodes");
    let o = run(
        &out2,
        &["run-episode", "--pod-model", model.to_str().unwrap(), "--n-test", "8", "--plots"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_run_dir(&out2);
    assert_eq!(fs::read(dir.join("pod_model.json")).unwrap(), fs::read(&model).unwrap());
    assert!(dir.join("trace_ra2vipas.csv").is_file());
    assert!(dir.join("episode_rapas.svg").is_file());
    assert!(!dir.join("pod_dataset.csv").exists());
}
