use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qwass::SolverOptions;
use qwass_cli::instance::{CostKind, InstanceFile, ModeKind, Overrides};
use qwass_cli::report::{fmt_sig, gap_table, write_json, ReportRecord};
use qwass_cli::verify::{self, Suite, VerifyConfig};
use qwass_cli::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "qwass", version, about = "Quantum Wasserstein distances and divergences between quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cost operator; `custom` keeps the observable-based cost of the file.
    #[arg(long, global = true, value_enum)]
    cost: Option<CostFlag>,
    /// Exponent of the classical cost.
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeKind>,
    /// Solver tolerance on residuals and relative gap.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized verification suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write a JSON report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print solver iterations to stderr and every verification case.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CostFlag {
    Symm,
    Z,
    Custom,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal transport cost D^p and distance D.
    Distance { instance: PathBuf },
    /// Optimal Kantorovich potentials alongside the distance.
    Dual { instance: PathBuf },
    /// Quadratic divergence with both self-distances.
    Divergence { instance: PathBuf },
    /// Nonlinear and linearized optima of the strict-gap example.
    GapDemo,
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Points per axis of grid suites.
        #[arg(long, default_value_t = 21)]
        density: usize,
        /// Number of random cases; defaults depend on the suite.
        #[arg(long)]
        samples: Option<usize>,
    },
}

impl Cli {
    fn solver_options(&self) -> Result<SolverOptions> {
        let mut opts = SolverOptions { verbose: self.verbose, ..Default::default() };
        if let Some(tol) = self.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Usage(format!("--tol {tol} must be positive")));
            }
            opts.tol_gap = tol;
            opts.tol_feas = tol;
        }
        Ok(opts)
    }

    fn overrides(&self) -> Overrides {
        Overrides {
            cost: self.cost.map(|c| match c {
                CostFlag::Symm => Some(CostKind::Symm),
                CostFlag::Z => Some(CostKind::Z),
                CostFlag::Custom => None,
            }),
            p: self.p,
            mode: self.mode,
        }
    }

    fn load(&self, path: &Path) -> Result<InstanceFile> {
        InstanceFile::load(path)?.apply(&self.overrides())
    }
}

fn emit(cli: &Cli, rec: &ReportRecord) -> Result<()> {
    print!("{}", rec.to_text());
    if let Some(path) = &cli.out {
        write_json(path, rec)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let opts = cli.solver_options()?;
    match &cli.command {
        Command::Distance { instance } => emit(cli, &qwass_cli::commands::distance(&cli.load(instance)?, &opts, false)?),
        Command::Dual { instance } => emit(cli, &qwass_cli::commands::distance(&cli.load(instance)?, &opts, true)?),
        Command::Divergence { instance } => emit(cli, &qwass_cli::commands::divergence(&cli.load(instance)?, &opts)?),
        Command::GapDemo => {
            let ps = match cli.p {
                Some(p) => vec![p],
                None => vec![1.0, 2.0, 3.0],
            };
            let rows = qwass_cli::commands::gap_rows(&ps, &opts)?;
            print!("{}", gap_table(&rows));
            if let Some(path) = &cli.out {
                write_json(path, &rows)?;
            }
            Ok(())
        }
        Command::Verify { suite, density, samples } => {
            if *density == 0 {
                return Err(CliError::Usage("--density must be at least 1".into()));
            }
            let cfg = VerifyConfig { density: *density, samples: *samples, seed: cli.seed };
            let report = verify::run(*suite, &cfg, &SolverOptions { verbose: false, ..opts });
            for row in &report.rows {
                if cli.verbose {
                    let dev = row.deviation.map_or("error".to_string(), fmt_sig);
                    let params: Vec<String> = row.params.iter().map(|&v| fmt_sig(v)).collect();
                    println!("{:>6}  [{}]  deviation {dev}  {}", row.index, params.join(", "), if row.pass { "ok" } else { "FAIL" });
                }
                if !row.pass {
                    println!("failing case {}", serde_json::to_string(row).map_err(|e| CliError::Failure(e.to_string()))?);
                }
            }
            println!(
                "suite {}: {} cases, {} failures, max deviation {}, tolerance {}: {}",
                suite.name(),
                report.cases,
                report.failures,
                fmt_sig(report.max_deviation),
                fmt_sig(report.tolerance),
                if report.passed { "pass" } else { "fail" }
            );
            if let Some(path) = &cli.out {
                write_json(path, &report)?;
            }
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Failure(format!("suite {} failed {} of {} cases", suite.name(), report.failures, report.cases)))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
