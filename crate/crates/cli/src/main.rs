use std::path::PathBuf;
use std::process::ExitCode;

use causal_bounds_cli::{bound, report, run, simulate, CliResult, RunSpec};
use clap::{Args, Parser, Subcommand};

/// Partial-identification bounds: simulation sweeps, bounding runs and
/// metric reports.
#[derive(Parser)]
#[command(name = "cbounds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate datasets and ground-truth sidecars.
    Simulate(Flags),
    /// Run bounding algorithms on simulated datasets.
    Bound(Flags),
    /// Compute metrics from bounds.csv.
    Report(Flags),
    /// simulate, bound and report in one go.
    Run(Flags),
}

/// Flags override fields of the `--config` JSON document.
#[derive(Args)]
struct Flags {
    /// JSON run specification.
    #[arg(long)]
    config: Option<PathBuf>,
    /// BinaryConf, BinaryIV, ContConf, ContIV or BinaryEntropyConf.
    #[arg(long)]
    scenario: Option<String>,
    /// Number of simulations.
    #[arg(long = "N")]
    n_sims: Option<usize>,
    /// Units per simulation.
    #[arg(long = "n")]
    n_units: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated algorithm names, e.g. ATE_manski,PNS_tianpearl.
    #[arg(long, allow_hyphen_values = true)]
    algos: Option<String>,
    /// Entropy cap for algorithms named plain `entropybounds`.
    #[arg(long)]
    theta: Option<f64>,
    /// Comma-separated entropy levels to keep (BinaryEntropyConf).
    #[arg(long, value_delimiter = ',')]
    level: Option<Vec<f64>>,
    /// Run all algorithms on the binarized outcome.
    #[arg(long)]
    binned: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Flags {
    fn spec(self) -> CliResult<RunSpec> {
        let base = match &self.config {
            Some(p) => RunSpec::from_file(p)?,
            None => RunSpec::default(),
        };
        let algorithms = self.algos.map(|s| {
            s.split(',')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .map(String::from)
                .collect()
        });
        Ok(base.merged(RunSpec {
            scenario: self.scenario,
            n_sims: self.n_sims,
            n_units: self.n_units,
            seed: self.seed,
            algorithms,
            theta: self.theta,
            levels: self.level,
            binned: self.binned.then_some(true),
            out: self.out,
            jobs: self.jobs,
            ..RunSpec::default()
        }))
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Simulate(f) => {
            let spec = f.spec()?;
            let m = simulate(&spec)?;
            println!("simulated {} datasets into {}", m.simulations.len(), spec.out_dir().display());
        }
        Command::Bound(f) => {
            let spec = f.spec()?;
            let rows = bound(&spec)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("wrote {} bounds ({failed} failures) to {}", rows.len(), spec.out_dir().join("bounds.csv").display());
        }
        Command::Report(f) => {
            let spec = f.spec()?;
            report(&spec)?;
            let md = std::fs::read_to_string(spec.out_dir().join("metrics.md"))?;
            print!("{md}");
        }
        Command::Run(f) => {
            let spec = f.spec()?;
            run(&spec)?;
            let md = std::fs::read_to_string(spec.out_dir().join("metrics.md"))?;
            print!("{md}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cbounds: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
