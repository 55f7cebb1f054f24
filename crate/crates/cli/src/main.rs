use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use underlay_core::config::ExperimentConfig;
use underlay_core::harness::run_sweep;
use underlay_core::report::{sig9, write_summary, RecordWriter};
use underlay_core::verify::run_oracle_suite;
use underlay_core::Error;

/// Admission control for an underlay massive-MIMO downlink.
#[derive(Parser)]
#[command(name = "underlay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and write records.csv and summary.csv.
    Run(RunArgs),
    /// Check a config file and print every resolved parameter.
    Validate(ConfigArgs),
    /// Run the numerical cross-checks.
    Oracle {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override runtime.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override runtime.threads (0 uses every core).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Config(Error),
    Oracle(Vec<String>),
    Other(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Config(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
            Failure::Oracle(names) => {
                eprintln!("oracle failure: {}", names.join(", "));
                ExitCode::from(3)
            }
            Failure::Other(message) => {
                eprintln!("error: {message}");
                ExitCode::from(1)
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig, Failure> {
    let mut config = ExperimentConfig::from_file(&args.config).map_err(Failure::Config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    Ok(config)
}

fn validate(args: &ConfigArgs) -> Result<(), Failure> {
    let config = load(args)?;
    let rows = config.table();
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = io::stdout().lock();
    let g = &config.geometry;
    writeln!(
        out,
        "valid: K={}, M_b={}, M_u={}, {} trials over {} {} values",
        g.num_ues,
        g.bs_antennas,
        g.ue_antennas,
        config.trials,
        config.sweep.values.len(),
        config.sweep.variable.name()
    )?;
    for (key, value) in rows {
        writeln!(out, "{key:width$}  {value}")?;
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let config = load(&args.config)?;
    fs::create_dir_all(&args.out)?;
    let variable = config.sweep.variable;
    let mut records = RecordWriter::new(BufWriter::new(create(&args.out, "records.csv")?), variable)?;
    let summary = run_sweep(&config, |r| {
        records
            .write(r)
            .map_err(|e| Error::Domain(format!("writing records: {e}")))
    })?;
    records.finish()?.flush()?;

    let mut file = BufWriter::new(create(&args.out, "summary.csv")?);
    write_summary(&mut file, variable, &summary)?;
    file.flush()?;

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:>12}  {:<12} {:>10} {:>10}",
        variable.name(),
        "solver",
        "mean",
        "stderr"
    )?;
    for cell in summary.cells() {
        writeln!(
            out,
            "{:>12}  {:<12} {:>10} {:>10}",
            sig9(cell.sweep_value),
            cell.solver.name(),
            format!("{:.3}", cell.mean_admitted),
            format!("{:.3}", cell.stderr)
        )?;
    }
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<File, Failure> {
    let path = dir.join(name);
    File::create(&path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn oracle(seed: u64) -> Result<(), Failure> {
    let checks = run_oracle_suite(seed);
    let mut failed = Vec::new();
    for check in &checks {
        println!(
            "{} {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
        if !check.passed {
            failed.push(check.name.to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Oracle(failed))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Validate(args) => validate(args),
        Command::Oracle { seed } => oracle(*seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}
