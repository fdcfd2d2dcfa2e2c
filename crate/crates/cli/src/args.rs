//! Command line surface: fixed global flags plus a `--kebab-case` mirror of
//! every configuration key.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ra2vipas::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "ra2vipas", version, about = "Radio-visual transmitter discovery simulator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalOpts {
    /// Flat TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Parent directory for run directories (falls back to RA2VIPAS_OUT, then ./runs).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plots: bool,

    /// Use a saved POD model instead of training one.
    #[arg(long, global = true, value_name = "PATH")]
    pub pod_model: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Collect a POD training set, fit the POD model and score it.
    TrainPod(Overrides),
    /// Run one discovery episode per selected variant on one world.
    RunEpisode(Overrides),
    /// Run the Monte Carlo Discovery Rate experiment.
    RunMc(Overrides),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    /// Any configuration key as `--key-name value` (for example `--sigma-rf 0`).
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "KEY VALUE")]
    pub rest: Vec<String>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TrainPod(_) => "train-pod",
            Self::RunEpisode(_) => "run-episode",
            Self::RunMc(_) => "run-mc",
        }
    }

    pub fn overrides(&self) -> &[String] {
        match self {
            Self::TrainPod(o) | Self::RunEpisode(o) | Self::RunMc(o) => &o.rest,
        }
    }
}

/// Split `--key value`, `--key=value` and bare `--flag` tokens into pairs.
/// A bare flag means `true`.
pub fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        let Some(body) = tok.strip_prefix("--") else {
            bail!("unexpected argument `{tok}` (expected --key value)");
        };
        if let Some((k, v)) = body.split_once('=') {
            out.push((k.replace('-', "_"), v.to_string()));
            i += 1;
            continue;
        }
        let key = body.replace('-', "_");
        match tokens.get(i + 1) {
            Some(next) if !is_flag(next) => {
                out.push((key, next.clone()));
                i += 2;
            }
            _ => {
                out.push((key, "true".into()));
                i += 1;
            }
        }
    }
    Ok(out)
}

/// `--x` is a flag, `-3` is a value.
fn is_flag(tok: &str) -> bool {
    tok.starts_with("--") && tok.len() > 2 && !tok[2..].starts_with(|c: char| c.is_ascii_digit() || c == '.')
}

/// Resolved configuration plus the options that are not config keys.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub pod_model: Option<PathBuf>,
    pub out_root: PathBuf,
}

/// Defaults, then the config file, then flags.
pub fn resolve(global: &GlobalOpts, overrides: &[String], env_out: Option<String>) -> Result<Resolved> {
    let mut config = RunConfig::load(global.config.as_deref())
        .with_context(|| format!("loading config {:?}", global.config.as_deref().unwrap_or("<defaults>".as_ref())))?;
    let mut pod_model = global.pod_model.clone();
    let mut out_flag = global.out.clone();
    let mut plots = global.plots;
    for (key, value) in parse_overrides(overrides)? {
        match key.as_str() {
            "pod_model" => pod_model = Some(PathBuf::from(value)),
            "out" => out_flag = Some(PathBuf::from(value)),
            "config" => bail!("--config must come before the overrides"),
            "plots" => {
                plots = value
                    .parse()
                    .map_err(|_| anyhow::anyhow!("config key `plots`: expected true or false, got `{value}`"))?
            }
            _ => config.set(&key, &value)?,
        }
    }
    if let Some(s) = global.seed {
        config.set("seed", &s.to_string())?;
    }
    if plots {
        config.plots = true;
    }
    if let Some(o) = &out_flag {
        config.out_dir = o.to_string_lossy().into_owned();
    }
    config.validate()?;
    let out_root = if !config.out_dir.is_empty() {
        PathBuf::from(&config.out_dir)
    } else if let Some(e) = env_out.filter(|e| !e.is_empty()) {
        PathBuf::from(e)
    } else {
        PathBuf::from("runs")
    };
    Ok(Resolved {
        config,
        pod_model,
        out_root,
    })
}
