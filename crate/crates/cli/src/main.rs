use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use risqos::harq::LogBase;
use risqos::link_stats::OutageModel;
use risqos_cli::config::{ConfigError, ExperimentConfig, SweepVariable, DEFAULT_TOML};
use risqos_cli::plot::{emit_plot, load_result, Format};
use risqos_cli::sweep::{run_sweep, write_outputs};
use risqos_cli::validate::{run_validation, Fault};
use risqos_cli::{layout, plot};

#[derive(Parser)]
#[command(name = "risqos", version, about = "Effective-capacity sweeps and oracle validation for RIS-assisted D2D links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML configuration; the shipped default when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (never changes results).
    #[arg(long)]
    workers: Option<usize>,
    /// Monte Carlo trials per oracle estimate.
    #[arg(long)]
    trials: Option<u64>,
    /// Use exact ratio CDFs for the underlay outages.
    #[arg(long)]
    exact_outage: bool,
    /// Base of the log(x l)/l term in the HARQ decoding error: 2 or e.
    #[arg(long)]
    harq_log_base: Option<LogBase>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SweepChoice {
    Rate,
    Qos,
    Harq,
    Sigma,
    Pon,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write CSV + JSON metadata.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep to run; the config's `sweep.variable` when omitted.
        #[arg(long, value_enum)]
        sweep: Option<SweepChoice>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add Monte Carlo (or root-finding) deltas to every row.
        #[arg(long)]
        with_oracle: bool,
        /// Also write an SVG plot per sweep.
        #[arg(long)]
        plot: bool,
    },
    /// Run the oracle suite and print a JSON report; exit 1 on any failure.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Corrupt an input on purpose to exercise the failure path.
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
    /// Render a sweep CSV (with its JSON metadata alongside) as a plot.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
    },
    /// Assess seeded node placements under a configuration.
    Layout {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        draw_seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Print the shipped default configuration.
    DefaultConfig,
}

enum Failure {
    Config(String),
    Validation,
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(path: &Option<PathBuf>) -> Result<ExperimentConfig, ConfigError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => ExperimentConfig::from_toml(DEFAULT_TOML),
    }
}

fn configure(common: &Common) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(w) = common.workers {
        cfg.mc.workers = w;
    }
    if let Some(t) = common.trials {
        cfg.mc.trials = t;
    }
    if common.exact_outage {
        cfg.regime.outage_model = OutageModel::Exact;
    }
    if let Some(b) = common.harq_log_base {
        cfg.sweep.harq.log_base = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep {
            common,
            sweep,
            out,
            with_oracle,
            plot: want_plot,
        } => {
            let mut cfg = configure(&common)?;
            if let Some(o) = out {
                cfg.output.dir = o.to_string_lossy().into_owned();
            }
            let variables: Vec<SweepVariable> = match sweep {
                None => vec![cfg.sweep.variable],
                Some(SweepChoice::All) => SweepVariable::ALL.to_vec(),
                Some(SweepChoice::Rate) => vec![SweepVariable::Rate],
                Some(SweepChoice::Qos) => vec![SweepVariable::Qos],
                Some(SweepChoice::Harq) => vec![SweepVariable::Harq],
                Some(SweepChoice::Sigma) => vec![SweepVariable::Sigma],
                Some(SweepChoice::Pon) => vec![SweepVariable::Pon],
            };
            let dir = PathBuf::from(&cfg.output.dir);
            for v in variables {
                let result = run_sweep(&cfg, v, with_oracle).with_context(|| format!("{} sweep", v.name()))?;
                write_outputs(&cfg, &result, &dir)?;
                if want_plot || cfg.output.plots {
                    emit_plot(&result, Format::Svg, &dir.join(format!("{}.svg", v.name())))?;
                }
                eprintln!("{}: {} rows -> {}", v.name(), result.rows.len(), dir.display());
            }
            Ok(())
        }
        Command::Validate {
            common,
            out,
            inject_fault,
        } => {
            let cfg = configure(&common)?;
            let report = run_validation(&cfg, inject_fault)?;
            let text = serde_json::to_string_pretty(&report).context("serializing report")? + "\n";
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAILED {}: {} vs {} ({})", c.name, c.value, c.reference, c.detail);
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
        Command::Plot { csv, out, format } => {
            let result = load_result(&csv)?;
            let path = out.unwrap_or_else(|| csv.with_extension("svg"));
            plot::emit_plot(&result, format, &path)?;
            Ok(())
        }
        Command::Layout {
            config,
            draw_seed,
            count,
        } => {
            let cfg = load(&config)?;
            for s in draw_seed..draw_seed.saturating_add(count) {
                match layout::assess(&cfg, s) {
                    Ok(r) => println!("{}", serde_json::to_string(&r).context("serializing layout")?),
                    Err(e) => println!("{{\"draw_seed\":{s},\"error\":{:?}}}", e.to_string()),
                }
            }
            Ok(())
        }
        Command::DefaultConfig => {
            print!("{DEFAULT_TOML}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
