#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use thz_hybrid::exec::Exec;
use thz_hybrid::experiments::config::{load_config_with, ScenarioConfig, BACKHAUL_TOML};
use thz_hybrid::experiments::{run_array_gain, run_daosa_tradeoff, run_power_budget, run_rate_vs_power, run_rayleigh, SweepResult};

#[derive(Parser)]
#[command(name = "thz-hybrid", version, about = "THz ultra-massive MIMO hybrid beamforming sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML). Relative paths also resolve against $THZ_HYBRID_CONFIG_DIR.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key, e.g. --set radio.noise_figure_db=0
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Recorded in the output metadata.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,
    /// Run sweep points one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Rate of FC, AoSA and WSMS against transmit power.
    RateVsPower(Common),
    /// Rate and consumed power along the DAoSA switch path.
    DaosaTradeoff(Common),
    /// Phase-shifter and true-time-delay array gain across the band.
    ArrayGain(Common),
    /// Rayleigh distance of an aperture at several carriers.
    Rayleigh {
        #[command(flatten)]
        common: Common,
        /// Aperture in meters.
        #[arg(long, default_value_t = 0.1)]
        aperture: f64,
        /// Carrier frequencies in Hz.
        #[arg(long = "frequency", default_values_t = [6e9, 60e9, 1e12])]
        frequencies: Vec<f64>,
    },
    /// Device counts and consumed power per architecture.
    PowerBudget {
        #[command(flatten)]
        common: Common,
        /// RF chains; defaults to radio.rf_chains.
        #[arg(long)]
        rf_chains: Option<usize>,
    },
}

fn load(common: &Common) -> thz_hybrid::Result<ScenarioConfig> {
    let mut overrides = common.set.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("algorithm.seed={seed}"));
    }
    match &common.config {
        Some(path) => load_config_with(path, &overrides),
        None => ScenarioConfig::from_toml_str(BACKHAUL_TOML, &overrides),
    }
}

fn run(cli: Cli) -> thz_hybrid::Result<(SweepResult, Common)> {
    let exec_of = |c: &Common| if c.sequential { Exec::Sequential } else { Exec::Parallel };
    Ok(match cli.command {
        Command::RateVsPower(c) => {
            let cfg = load(&c)?;
            (run_rate_vs_power(&cfg, &cfg.sweep.power_dbm, &cfg.sweep.architectures, exec_of(&c))?, c)
        }
        Command::DaosaTradeoff(c) => {
            let cfg = load(&c)?;
            (run_daosa_tradeoff(&cfg, exec_of(&c))?, c)
        }
        Command::ArrayGain(c) => {
            let cfg = load(&c)?;
            (run_array_gain(&cfg)?, c)
        }
        Command::Rayleigh { common, aperture, frequencies } => (run_rayleigh(aperture, &frequencies, common.seed.unwrap_or(0))?, common),
        Command::PowerBudget { common, rf_chains } => {
            let cfg = load(&common)?;
            let n_rf = rf_chains.unwrap_or(cfg.radio.rf_chains);
            (run_power_budget(&cfg, n_rf)?, common)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, common) = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &common.out {
        Some(path) => result.save(path),
        None => result.write_csv(std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let flagged = result.flagged();
    if !common.quiet {
        eprintln!("{}: {} rows, {} flagged", result.metadata.experiment, result.rows.len(), flagged);
    }
    if flagged == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
