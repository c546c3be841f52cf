use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cmi_lab::harness::{
    exit_code, run_suite, write_estimates_csv, write_gaps_csv, write_report, Experiment, Format, LossChoice,
    SuiteConfig, SuiteReport, EXIT_OK, EXIT_UNSATISFIED,
};
use cmi_lab::kernel::{CapacityOptions, CmiEstimate};
use cmi_lab::{Error, Result};

/// Compute CMI-type quantities of learning algorithms and check
/// generalization bounds against seeded experiments.
#[derive(Parser, Debug)]
#[command(name = "cmi-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Suite configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Replaces the seed given in the config.
    #[arg(long, global = true)]
    seed_override: Option<u64>,

    /// Worker threads; all results are independent of this value.
    #[arg(long, global = true, env = "CMI_LAB_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Distributional CMI of every experiment, in its configured mode.
    Cmi,
    /// Universal CMI over the experiment's candidate supersamples.
    Ucmi,
    /// Evaluated CMI under the zero-one loss.
    Ecmi,
    /// Theorem checks for every experiment (no property families).
    Bound,
    /// Generalization-gap estimates.
    Gap,
    /// Theorem checks for the experiments measured in AUROC.
    Auroc,
    /// Experiments, theorem checks and property families.
    Suite,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

fn load(cli: &Cli) -> Result<SuiteConfig> {
    let path = cli.config.as_deref().ok_or_else(|| Error::InvalidArgument("--config is required".into()))?;
    let mut config = SuiteConfig::load(path)?;
    if let Some(seed) = cli.seed_override {
        config.seed = seed;
    }
    Ok(config)
}

fn experiments(config: &SuiteConfig) -> Result<Vec<Experiment>> {
    config.experiments.iter().map(Experiment::build).collect()
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| Error::Io { path: p.into(), source }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn to_json(value: &serde_json::Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Emits per-experiment estimates; returns the exit code.
fn estimates(cli: &Cli, format: Format, rows: Vec<(String, CmiEstimate)>) -> Result<i32> {
    let bytes = match format {
        Format::Json => to_json(&rows.iter().map(|(id, e)| serde_json::json!({"id": id, "estimate": e})).collect())?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_estimates_csv(&rows, &mut buf)?;
            buf
        }
    };
    write_out(cli.out.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn report(cli: &Cli, format: Format, report: &SuiteReport) -> Result<i32> {
    let mut bytes = Vec::new();
    write_report(report, format, &mut bytes)?;
    write_out(cli.out.as_deref(), &bytes)?;
    Ok(report.exit_code())
}

fn run(cli: &Cli) -> Result<i32> {
    let mut config = load(cli)?;
    let seed = config.seed;
    let default_format = match cli.command {
        Command::Bound | Command::Auroc => Format::Csv,
        _ => Format::Json,
    };
    let format = cli.format.map_or(default_format, Format::from);
    match cli.command {
        Command::Suite => report(cli, format, &run_suite(&config)?),
        Command::Bound => {
            config.properties.clear();
            report(cli, format, &run_suite(&config)?)
        }
        Command::Auroc => {
            let all = experiments(&config)?;
            config.properties.clear();
            config.experiments = all
                .into_iter()
                .filter(|e| e.loss == LossChoice::Auroc)
                .map(|e| e.config)
                .collect();
            if config.experiments.is_empty() {
                return Err(Error::InvalidArgument("no experiment uses the auroc loss".into()));
            }
            report(cli, format, &run_suite(&config)?)
        }
        Command::Cmi => {
            let rows = experiments(&config)?
                .iter()
                .map(|e| Ok((e.id().to_string(), e.cmi(seed)?.used)))
                .collect::<Result<Vec<_>>>()?;
            estimates(cli, format, rows)
        }
        Command::Ecmi => {
            let rows = experiments(&config)?
                .iter()
                .map(|e| Ok((e.id().to_string(), e.ecmi(seed)?)))
                .collect::<Result<Vec<_>>>()?;
            estimates(cli, format, rows)
        }
        Command::Ucmi => {
            let rows = experiments(&config)?
                .iter()
                .map(|e| Ok((e.id().to_string(), e.ucmi(seed, CapacityOptions::default())?)))
                .collect::<Result<Vec<_>>>()?;
            estimates(cli, format, rows)
        }
        Command::Gap => {
            let rows = experiments(&config)?
                .iter()
                .map(|e| Ok((e.id().to_string(), e.gap(seed)?)))
                .collect::<Result<Vec<_>>>()?;
            let bytes = match format {
                Format::Json => {
                    to_json(&rows.iter().map(|(id, g)| serde_json::json!({"id": id, "gap": g})).collect())?
                }
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_gaps_csv(&rows, &mut buf)?;
                    buf
                }
            };
            write_out(cli.out.as_deref(), &bytes)?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let code = match pool.install(|| run(&cli)) {
        Ok(code) => {
            if code == EXIT_UNSATISFIED {
                eprintln!("some checked inequalities are not satisfied");
            }
            code
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    };
    ExitCode::from(code as u8)
}
