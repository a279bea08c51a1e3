use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use illg_core::config::{bundled, ExperimentConfig, TimeSpec, BUNDLED};
use illg_core::experiments::{self, exit_code, Overrides, EXIT_VALIDATION};
use illg_core::validation::all_criteria;
use illg_core::{Error, Result};

/// Inertial LLG macrospin simulator and switching planner.
#[derive(Parser)]
#[command(name = "illg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the switching plan and the first-order state check at t*.
    Plan {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a trajectory and write it as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Add closed-form approximation columns.
        #[arg(long)]
        with_approx: bool,
        /// Keep every k-th accepted step.
        #[arg(long, value_name = "K")]
        stride: Option<usize>,
    },
    /// Integrate once per switch-off time of the sweep grid.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the closed-form approximations only, on [0, 2 T_sw].
    Approx {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Run the acceptance suite on the bundled configurations.
    Validate {
        /// Run only these criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file, or the name of a bundled configuration.
    #[arg(long, value_name = "PATH")]
    config: String,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Switch-off time: a number or `auto`.
    #[arg(long, value_name = "V|auto")]
    t_star: Option<TimeSpec>,
}

fn load(spec: &str) -> Result<ExperimentConfig> {
    let path = Path::new(spec);
    if !path.exists() && BUNDLED.iter().any(|(n, _)| *n == spec) {
        return bundled(spec);
    }
    ExperimentConfig::load(path)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn config(common: &Common, overrides: Overrides) -> Result<ExperimentConfig> {
    let cfg = load(&common.config)?;
    Ok(Overrides { t_star: common.t_star, ..overrides }.apply(&cfg))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Plan { common } => {
            let cfg = config(&common, Overrides::default())?;
            let out = experiments::plan(&cfg)?;
            print!("{}", out.text);
            if let Some(path) = common.out.as_ref().or(cfg.output.plan.as_ref().map(PathBuf::from).as_ref()) {
                std::fs::write(path, &out.file)?;
            }
        }
        Command::Simulate { common, with_approx, stride } => {
            let cfg = config(&common, Overrides { stride, with_approx, ..Default::default() })?;
            let out = experiments::simulate(&cfg)?;
            emit(&common.out.clone().or(cfg.output.trajectory.as_ref().map(PathBuf::from)), &out.csv)?;
            eprint!("{}", out.summary);
        }
        Command::Sweep { common } => {
            let csv = experiments::sweep(&config(&common, Overrides::default())?)?;
            emit(&common.out, &csv)?;
        }
        Command::Approx { common, points } => {
            let csv = experiments::approx(&config(&common, Overrides::default())?, points)?;
            emit(&common.out, &csv)?;
        }
        Command::Validate { only } => {
            let mut failed = 0;
            for (k, criterion) in all_criteria().into_iter().enumerate() {
                if !only.is_empty() && !only.contains(&(k as u8 + 1)) {
                    continue;
                }
                let report = criterion();
                println!("{}", report.render());
                failed += usize::from(!report.passed());
            }
            if failed > 0 {
                eprintln!("{failed} criteria failed");
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::StepSizeUnderflow { last_good, .. } = &e {
                eprintln!("last good state: m = {:?}, v = {:?}", last_good.m.as_slice(), last_good.v.as_slice());
            }
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
