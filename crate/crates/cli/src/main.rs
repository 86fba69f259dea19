use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use im_mras::scenario::{self, ScenarioConfig};
use im_mras::Error;

/// Induction motor IFOC drive with online rotor-resistance adaptation.
#[derive(Debug, Parser)]
#[command(name = "im-mras", version)]
struct Cli {
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List,
    /// Print a built-in scenario in config-file form.
    Show { scenario: String },
    /// Run a built-in scenario or a config file.
    Run { target: String },
    /// Recompute the run summary from a CSV time series.
    Summary {
        csv: PathBuf,
        /// True rotor resistance for the settling metric, ohm.
        #[arg(long, default_value_t = 0.412)]
        true_rr: f64,
        /// Final speed reference, rpm.
        #[arg(long, default_value_t = 250.0)]
        speed_ref: f64,
    },
    /// Run one scenario repeatedly, varying a single config key.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value = "adapt-quarter")]
        scenario: String,
    },
}

/// Distinct exit statuses per failure class.
#[derive(Debug, Clone, Copy)]
enum Failure {
    UnknownScenario = 2,
    Config = 3,
    Output = 4,
    Simulation = 5,
    Input = 6,
    Usage = 64,
}

struct CliError {
    kind: Failure,
    msg: String,
}

impl CliError {
    fn new(kind: Failure, err: impl std::fmt::Display) -> Self {
        Self {
            kind,
            msg: err.to_string(),
        }
    }
}

fn classify(err: Error) -> CliError {
    let kind = match &err {
        Error::UnknownScenario(_) => Failure::UnknownScenario,
        Error::Config(_) | Error::Parse { .. } | Error::UnknownKey(_) => Failure::Config,
        Error::NonFinite { .. } | Error::Contract(_) => Failure::Simulation,
        Error::Io(_) | Error::Csv(_) => Failure::Input,
    };
    CliError::new(kind, err)
}

fn resolve(target: &str) -> Result<ScenarioConfig, CliError> {
    let path = Path::new(target);
    if path.is_file() {
        ScenarioConfig::from_file(path).map_err(classify)
    } else {
        scenario::builtin(target).map_err(classify)
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::new(Failure::Output, format!("cannot create {}: {e}", dir.display())))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::List => {
            for cfg in scenario::builtin_scenarios() {
                println!(
                    "{:<14} cmd_rr = {:.3} ohm  adaptation = {}",
                    cfg.name,
                    cfg.cmd_rr,
                    if cfg.adaptation_enabled { "on" } else { "off" }
                );
            }
        }
        Command::Show { scenario: name } => {
            print!("{}", scenario::builtin(&name).map_err(classify)?.to_config_string());
        }
        Command::Run { target } => {
            let cfg = resolve(&target)?;
            cfg.validate().map_err(classify)?;
            let path = scenario::csv_path(&cfg, &cli.out);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                prepare_dir(parent)?;
            }
            let out = scenario::run(&cfg).map_err(classify)?;
            scenario::write_csv_file(&path, &out.samples)
                .map_err(|e| CliError::new(Failure::Output, format!("cannot write {}: {e}", path.display())))?;
            println!("scenario {}  ->  {}", cfg.name, path.display());
            println!("{}", out.summary);
        }
        Command::Summary {
            csv,
            true_rr,
            speed_ref,
        } => {
            let samples = scenario::read_csv_file(&csv).map_err(classify)?;
            println!("{}", scenario::summarize(&samples, true_rr, speed_ref));
        }
        Command::Sweep {
            param,
            values,
            scenario: name,
        } => {
            let base = resolve(&name)?;
            prepare_dir(&cli.out)?;
            let results = scenario::sweep(&base, &param, &values, &cli.out).map_err(|e| match e {
                Error::Io(io) => CliError::new(Failure::Output, io),
                other => classify(other),
            })?;
            println!(
                "{:<12} {:>12} {:>14} {:>14} {:>12} {:>10}",
                param, "final_Rr", "Rr_settle_s", "lqr/ldr", "rise_s", "overshoot%"
            );
            for r in &results {
                let s = &r.summary;
                println!(
                    "{:<12} {:>12.6} {:>14} {:>14.4e} {:>12} {:>10.3}",
                    r.value,
                    s.final_rr_hat,
                    s.rr_settling_time.map_or("-".to_string(), |t| format!("{t:.4}")),
                    s.steady_lambda_qr_ratio,
                    s.speed_rise_time.map_or("-".to_string(), |t| format!("{t:.4}")),
                    s.max_speed_overshoot
                );
            }
            for r in &results {
                println!("wrote {}", r.csv.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Failure::Usage as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.kind as u8)
        }
    }
}
