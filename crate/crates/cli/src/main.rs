mod args;
mod commands;
mod plot;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command};

fn main() -> Result<()> {
    let cli = Cli::parse();
    let res = args::resolve(&cli.global, cli.command.overrides(), std::env::var("RA2VIPAS_OUT").ok())?;
    let dir = match &cli.command {
        Command::TrainPod(_) => commands::train_pod(&res)?,
        Command::RunEpisode(_) => commands::run_single_episode(&res)?,
        Command::RunMc(_) => commands::run_monte_carlo(&res)?,
    };
    println!("{} artifacts written to {}", cli.command.name(), dir.display());
    Ok(())
}
