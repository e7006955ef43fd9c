use std::path::PathBuf;

use bellstab_core::checks::{run_suite, Suite};
use bellstab_core::ensemble::{run_campaign, write_outputs, CampaignConfig, EnsembleSummary};
use bellstab_core::{BellLabel, Error as CoreError, ScenarioPreset};
use clap::{Parser, Subcommand};

use crate::config::{self, ConfigError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_CAMPAIGN: u8 = 3;
pub const EXIT_CHECK: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "bellstab",
    version,
    about = "Feedback stabilization of Bell states under continuous measurement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo campaign.
    Run(RunArgs),
    /// Run a numerical check suite.
    Check {
        /// Suite name, or `all`.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// List presets, or print one as a configuration file.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    List,
    Show { name: String },
}

#[derive(Debug, clap::Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    /// Preset to start from (default fig1_qsr).
    #[arg(long)]
    pub preset: Option<String>,
    /// Configuration file; may itself name a preset.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_traj: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write per-trajectory series for the first N trajectories.
    #[arg(long)]
    pub save_trajectories: Option<usize>,
}

/// Base configuration plus command-line overrides, validated.
pub fn resolve(args: &RunArgs) -> Result<CampaignConfig, ConfigError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => config::parse_config(path)?,
        (None, Some(name)) => name
            .parse::<ScenarioPreset>()
            .map_err(|e| ConfigError::Validation {
                key: "preset".into(),
                message: e.to_string(),
            })?
            .config(),
        (None, None) => ScenarioPreset::Fig1Qsr.config(),
    };
    if let Some(n) = args.n_traj {
        cfg.n_traj = n;
    }
    if let Some(s) = args.seed {
        cfg.sde.seed = s;
    }
    if let Some(dt) = args.dt {
        cfg.sde.dt = dt;
    }
    if let Some(t) = args.t_final {
        cfg.sde.t_final = t;
    }
    if let Some(d) = &args.out_dir {
        cfg.outputs = Some(d.clone());
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(n) = args.save_trajectories {
        cfg.save_trajectories = n;
    }
    config::validate(&cfg)?;
    Ok(cfg)
}

pub fn summary_line(s: &EnsembleSummary) -> String {
    let freqs = BellLabel::ALL
        .iter()
        .map(|&l| format!("{l}={:.3}", s.frequency(l)))
        .collect::<Vec<_>>()
        .join(" ");
    let exponent = s
        .exponent
        .map_or_else(|| "n/a".to_string(), |f| format!("{:.4}", f.slope));
    format!(
        "n_traj={} failed={} {freqs} unconverged={} exponent={exponent} reference_exponent={:.4}",
        s.n_traj, s.n_failed, s.unconverged, s.reference_exponent
    )
}

fn run(args: &RunArgs) -> u8 {
    let cfg = match resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                ConfigError::Io(_) => EXIT_OTHER,
                _ => EXIT_CONFIG,
            };
        }
    };
    let summary = match run_campaign(&cfg) {
        Ok(s) => s,
        Err(e @ CoreError::CampaignFailed { .. }) => {
            eprintln!("error: {e}");
            return EXIT_CAMPAIGN;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_OTHER;
        }
    };
    if let Some(dir) = &cfg.outputs {
        let written = write_outputs(&summary, &cfg, dir).and_then(|()| {
            std::fs::write(dir.join("config.cfg"), config::to_config_string(&cfg)).map_err(CoreError::from)
        });
        if let Err(e) = written {
            eprintln!("error: writing outputs to {}: {e}", dir.display());
            return EXIT_OTHER;
        }
    }
    println!("{}", summary_line(&summary));
    EXIT_OK
}

fn check(suite: &str, samples: Option<usize>, seed: u64) -> u8 {
    let suites = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        match suite.parse::<Suite>() {
            Ok(s) => vec![s],
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    };
    let mut code = EXIT_OK;
    for s in suites {
        let n = samples.unwrap_or_else(|| s.default_samples());
        match run_suite(s, n, seed) {
            Ok(report) => {
                println!("{report}");
                if !report.passed() {
                    code = EXIT_CHECK;
                }
            }
            Err(e) => {
                eprintln!("error: {s}: {e}");
                return match e {
                    CoreError::InvalidParameter { .. } => EXIT_CONFIG,
                    _ => EXIT_OTHER,
                };
            }
        }
    }
    code
}

fn presets(action: &PresetAction) -> u8 {
    match action {
        PresetAction::List => {
            for p in ScenarioPreset::ALL {
                println!("{:<18} {}", p.name(), p.description());
            }
            EXIT_OK
        }
        PresetAction::Show { name } => match name.parse::<ScenarioPreset>() {
            Ok(p) => {
                print!("{}", config::to_config_string(&p.config()));
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
    }
}

pub fn execute(cli: Cli) -> u8 {
    match &cli.command {
        Command::Run(args) => run(args),
        Command::Check { suite, samples, seed } => check(suite, *samples, *seed),
        Command::Presets { action } => presets(action),
    }
}
