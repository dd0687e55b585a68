//! `frontfix` command line: training runs, oracle bundles, comparisons and
//! the reference experiment sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frontfix::oracle::{FdConfig, LatticeConfig};
use frontfix::Scenario;

use frontfix_cli::bundle::{self, write_csv};
use frontfix_cli::config::{preset, ConfigError, ExperimentConfig};
use frontfix_cli::error::{CliError, CliResult};
use frontfix_cli::oracle_cmd::{self, OracleOptions};
use frontfix_cli::reproduce::{self, Overrides, Target};
use frontfix_cli::compare;

#[derive(Parser)]
#[command(name = "frontfix", version, about = "American put pricing with a front-fixed neural solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Experiment config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in config by name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; defaults to `[output] dir`, then `runs/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), ConfigError> {
        let cfg = match (&self.config, &self.preset) {
            (Some(p), _) => ExperimentConfig::load(p)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => {
                return Err(ConfigError {
                    key: "config".into(),
                    msg: "pass --config FILE or --preset NAME".into(),
                })
            }
        };
        let out = self
            .out
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| Path::new("runs").join(if cfg.name.is_empty() { "run" } else { &cfg.name }));
        Ok((cfg, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a network and write the run bundle.
    Train {
        #[command(flatten)]
        source: Source,
        /// Write zero elapsed times and no wall time, for byte-stable output.
        #[arg(long)]
        no_timing: bool,
    },
    /// Rebuild a bundle from a saved checkpoint without training.
    Evaluate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Write the finite-difference and lattice reference bundle.
    Oracle {
        #[command(flatten)]
        source: Source,
        /// Asset nodes of the FD grid.
        #[arg(long, default_value_t = 2000)]
        ns: usize,
        /// Time steps of the FD grid.
        #[arg(long, default_value_t = 2000)]
        nt: usize,
        /// PSOR relaxation factor.
        #[arg(long, default_value_t = 1.2)]
        omega: f64,
        /// PSOR convergence tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Far asset boundary as a multiple of the strike.
        #[arg(long, default_value_t = 4.0)]
        s_max: f64,
        #[arg(long, default_value_t = 10_000)]
        lattice_steps: usize,
        /// Spot prices priced on the lattice at maturity.
        #[arg(long, value_delimiter = ',', default_value = "85,90,100,120")]
        spots: Vec<f64>,
    },
    /// Error report of a model bundle against a reference bundle.
    Compare {
        model: PathBuf,
        reference: PathBuf,
        /// Report directory; defaults to the model bundle.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one reference experiment sweep.
    Reproduce {
        #[arg(value_parser = parse_target)]
        target: Target,
        #[arg(long, default_value = "reproduce")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of training steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Override the training grid size on both axes.
        #[arg(long)]
        grid: Option<usize>,
        /// Only run these scenarios.
        #[arg(long, value_delimiter = ',', value_parser = parse_scenario)]
        scenario: Option<Vec<Scenario>>,
        #[arg(long)]
        no_timing: bool,
    },
}

fn parse_target(s: &str) -> Result<Target, String> {
    Target::parse(s).ok_or_else(|| {
        let names: Vec<_> = Target::ALL.iter().map(|t| t.name()).collect();
        format!("unknown target '{s}', expected one of {}", names.join(", "))
    })
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    Scenario::parse(s).ok_or_else(|| format!("unknown scenario '{s}' (STM, MTM, LTM)"))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { source, no_timing } => {
            let (cfg, out) = source.load()?;
            let s = bundle::train(&cfg, &out, !no_timing)?;
            println!("{}: loss {:.6e}, sf(T) {:.4}", s.dir.display(), s.final_loss, s.sf_t);
        }
        Command::Evaluate { source, checkpoint } => {
            let (cfg, out) = source.load()?;
            let s = bundle::evaluate(&cfg, &checkpoint, &out)?;
            println!("{}: loss {:.6e}, sf(T) {:.4}", s.dir.display(), s.final_loss, s.sf_t);
        }
        Command::Oracle {
            source,
            ns,
            nt,
            omega,
            tol,
            s_max,
            lattice_steps,
            spots,
        } => {
            let (cfg, out) = source.load()?;
            let opts = OracleOptions {
                fd: FdConfig {
                    ns,
                    nt,
                    s_max: s_max * cfg.spec.strike,
                    omega,
                    tol,
                },
                lattice: LatticeConfig {
                    steps: lattice_steps,
                    ..LatticeConfig::default()
                },
                spots,
            };
            let sol = oracle_cmd::run(&cfg, &opts, &out)?;
            println!("{}: sf(T) {:.4}", out.display(), sol.final_boundary());
        }
        Command::Compare { model, reference, out } => {
            let c = compare::compare(&model, &reference)?;
            let out = out.unwrap_or_else(|| model.clone());
            bundle::create_dir(&out)?;
            write_csv(&out.join("compare_points.csv"), &c.points)?;
            if !c.lattice_points.is_empty() {
                write_csv(&out.join("compare_lattice.csv"), &c.lattice_points)?;
            }
            write_csv(&out.join("report.csv"), &c.report)?;
            for r in &c.report {
                println!("{},{}", r.metric, r.value);
            }
        }
        Command::Reproduce {
            target,
            out,
            seed,
            steps,
            grid,
            scenario,
            no_timing,
        } => {
            let o = Overrides {
                seed,
                steps,
                grid,
                scenarios: scenario,
            };
            let (path, rows) = reproduce::reproduce(target, &o, &out, !no_timing)?;
            for r in &rows {
                println!("{}: loss {:.6e}, sf(T) {:.4}", r.run, r.final_loss, r.sf_t);
            }
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Solver(inner) = &e {
                let mut src = std::error::Error::source(inner);
                while let Some(s) = src {
                    eprintln!("  caused by: {s}");
                    src = s.source();
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
