use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use expsel::pathsum::{EngineConfig, DEFAULT_PATH_CAP};
use expsel::prescriptions::compare;
use expsel::report::{render, render_sweep_csv, OutputFormat, RunReport};
use expsel::scenario::{EngineChoice, ScenarioDocument};
use expsel::{selftest, wignerfriend, Error};

#[derive(Parser)]
#[command(
    name = "expsel",
    about = "Evaluate selection-based probability tables for finite quantum models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Operator,
    Pathsum,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgainstArg {
    Minimal,
    Joint,
    #[value(name = "coherent_sum")]
    CoherentSum,
    #[value(name = "incoherent_sum")]
    IncoherentSum,
}

impl AgainstArg {
    fn name(self) -> &'static str {
        match self {
            AgainstArg::Minimal => "minimal",
            AgainstArg::Joint => "joint",
            AgainstArg::CoherentSum => "coherent_sum",
            AgainstArg::IncoherentSum => "incoherent_sum",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario document's prescription.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "operator")]
        engine: EngineArg,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Evaluate a document's prescription next to an alternative one.
    Compare {
        file: PathBuf,
        #[arg(long, value_enum)]
        against: AgainstArg,
        #[arg(long, value_enum, default_value = "operator")]
        engine: EngineArg,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Sweep the observer stage-2 tables over the (theta, phi) grid.
    Sweep {
        #[arg(long, default_value_t = 9)]
        theta_steps: usize,
        #[arg(long, default_value_t = 9)]
        phi_steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Run the acceptance suite and print one pass/fail line per criterion.
    Selftest {
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn engine_config(workers: usize) -> Result<EngineConfig, Error> {
    let path_cap = match std::env::var("EXPSEL_PATH_CAP") {
        Ok(text) => text.parse::<u64>().ok().filter(|&v| v > 0).ok_or_else(|| Error::Scenario {
            field: "EXPSEL_PATH_CAP".into(),
            message: format!("must be a positive integer, got {text:?}"),
        })?,
        Err(_) => DEFAULT_PATH_CAP,
    };
    Ok(EngineConfig { path_cap, workers: workers.max(1) })
}

fn to_format(arg: FormatArg) -> OutputFormat {
    match arg {
        FormatArg::Text => OutputFormat::Text,
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    }
}

fn to_engine(arg: EngineArg) -> EngineChoice {
    match arg {
        EngineArg::Operator => EngineChoice::Operator,
        EngineArg::Pathsum => EngineChoice::Pathsum,
    }
}

fn run_command(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Run { file, engine, format, workers } => {
            let cfg = engine_config(workers)?;
            let started = std::time::Instant::now();
            let built = ScenarioDocument::from_path(&file)?.build()?;
            let spec = built.prescription()?;
            let engine = to_engine(engine);
            let table = built.run(&spec, engine, &cfg)?;
            let report = RunReport {
                engine: engine.name(),
                kind: built.prescription_kind().to_string(),
                normalization: table.normalization(),
                table,
                divergence: None,
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            eprintln!("# wall_time_ms {:.3}", report.wall_time_ms);
            Ok(render(&report, to_format(format)))
        }
        Command::Compare { file, against, engine, format, workers } => {
            let cfg = engine_config(workers)?;
            let started = std::time::Instant::now();
            let built = ScenarioDocument::from_path(&file)?.build()?;
            let engine = to_engine(engine);
            let primary_spec = built.prescription()?;
            let against_spec = built.prescription_named(against.name())?;
            let primary = built.run(&primary_spec, engine, &cfg)?;
            let other = built.run(&against_spec, engine, &cfg)?;
            let divergence = compare(&primary, &other)?;
            let report = RunReport {
                engine: engine.name(),
                kind: built.prescription_kind().to_string(),
                normalization: primary.normalization(),
                table: primary,
                divergence: Some((against.name().to_string(), other, divergence)),
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            eprintln!("# wall_time_ms {:.3}", report.wall_time_ms);
            Ok(render(&report, to_format(format)))
        }
        Command::Sweep { theta_steps, phi_steps, format } => {
            if !matches!(format, FormatArg::Csv) {
                return Err(Error::InvalidArgument("sweep supports only --format csv".into()));
            }
            let sweep = wignerfriend::sweep_grid(theta_steps, phi_steps)?;
            Ok(render_sweep_csv(&sweep))
        }
        Command::Selftest { workers } => {
            let (report, passed) = selftest::full_report(workers.max(1));
            if passed {
                Ok(report)
            } else {
                // Echo the report before signalling failure.
                print!("{report}");
                std::io::stdout().flush().ok();
                let failed: Vec<&str> =
                    report.lines().filter(|l| l.starts_with("FAIL")).collect();
                Err(Error::InvalidArgument(format!("selftest failed: {}", failed.join("; "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let is_selftest = matches!(cli.command, Command::Selftest { .. });
    match run_command(cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if is_selftest { 1 } else { e.exit_code() };
            ExitCode::from(code as u8)
        }
    }
}
