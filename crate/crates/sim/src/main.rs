use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use director_core::CflMode;
use sim::verify::{run_check, VerifyOptions, CHECKS};
use sim::{ConfigError, Overrides, RunError};

/// Director field / electric potential simulator.
#[derive(Parser)]
#[command(name = "sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and write energies.csv, snapshots and manifest.cfg.
    ///
    /// Precedence, lowest first: preset defaults, --config file, --set
    /// pairs in order, dedicated flags.
    Run {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Output directory; defaults to $SIM_OUT_DIR, then ./out/<preset>.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cfl: Option<CflMode>,
        /// key=value override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Flat key = value file, e.g. a previous run's manifest.cfg.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Run structural checks and print one JSON object per check.
    Verify {
        /// One check; all when omitted.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(CHECKS))]
        check: Option<String>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scales the contraction check's step 0.02 h.
        #[arg(long, default_value_t = 1.0)]
        dt_factor: f64,
        /// Final time of the time-stepping checks.
        #[arg(long, default_value_t = 0.1)]
        final_time: f64,
    },
}

fn resolve(
    preset: Option<String>,
    n: Option<usize>,
    cfl: Option<CflMode>,
    set: &[String],
    config: Option<PathBuf>,
) -> Result<sim::RunConfig, ConfigError> {
    let mut o = Overrides::new();
    if let Some(path) = config {
        o.merge_file(&path)?;
    }
    for pair in set {
        o.set_pair(pair)?;
    }
    if let Some(p) = preset {
        o.set("preset", &p)?;
    }
    if let Some(n) = n {
        o.set("n", &n.to_string())?;
    }
    if let Some(mode) = cfl {
        o.set("cfl", &mode.to_string())?;
    }
    o.resolve()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            preset,
            n,
            out,
            cfl,
            set,
            config,
            quiet,
        } => {
            let outcome = resolve(preset, n, cfl, &set, config)
                .map_err(RunError::from)
                .and_then(|cfg| {
                    let dir = out
                        .or_else(|| std::env::var_os("SIM_OUT_DIR").map(PathBuf::from))
                        .unwrap_or_else(|| PathBuf::from("out").join(cfg.preset.name()));
                    if let Some(w) = sim::runner::cfl_warning(&cfg) {
                        eprintln!("warning: {w}");
                    }
                    sim::run(&cfg, &dir)
                });
            match outcome {
                Ok(summary) => {
                    if !quiet {
                        println!(
                            "{} steps to t = {:.6}, E = {:.6e}, alignment = {:.4}, output in {}",
                            summary.steps,
                            summary.final_time,
                            summary.last.reduced_energy,
                            summary.last.alignment,
                            summary.out_dir.display()
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Verify {
            check,
            n,
            seed,
            dt_factor,
            final_time,
        } => {
            let opts = VerifyOptions {
                n,
                seed,
                dt_factor,
                final_time,
            };
            let names: Vec<&str> = match &check {
                Some(c) => vec![c.as_str()],
                None => CHECKS.to_vec(),
            };
            let mut all = true;
            for name in names {
                let report = run_check(name, &opts).expect("check names are validated by clap");
                all &= report.passed;
                println!("{}", report.to_json());
            }
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
