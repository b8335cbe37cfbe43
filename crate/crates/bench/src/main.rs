use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use median_bench::{
    query_scaling_report, render_report, run_experiment, BenchError, ExperimentSpec, OutputFormat,
    Solver,
};
use median_core::generate::{read_matrix_file, DEFAULT_MATRIX_CAP};
use median_core::{brute_force_median, MetricFamily, Mode};

#[derive(Parser)]
#[command(name = "median", version, about = "Metric 1-median experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials of one solver and emit a report.
    Run(RunArgs),
    /// Exact 1-median of a matrix file.
    Exact {
        #[arg(long)]
        input: PathBuf,
    },
    /// Mean query counts over several sizes with a log-log slope.
    Scaling(ScalingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Indyk,
    Lasvegas,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Discrete,
    EuclideanUniform,
    EuclideanClustered,
    Explicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Practical,
    Faithful,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "euclidean-uniform")]
    family: FamilyArg,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 0.05)]
    spread: f64,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    solver: SolverArg,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Matrix file for the explicit family.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "practical")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ScalingArgs {
    #[arg(long, value_enum)]
    solver: SolverArg,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "practical")]
    mode: ModeArg,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn solver(s: SolverArg) -> Solver {
    match s {
        SolverArg::Exact => Solver::Exact,
        SolverArg::Indyk => Solver::Indyk,
        SolverArg::Lasvegas => Solver::Lasvegas,
    }
}

fn mode(m: ModeArg) -> Mode {
    match m {
        ModeArg::Practical => Mode::Practical,
        ModeArg::Faithful => Mode::Faithful,
    }
}

fn family(
    a: &FamilyArgs,
    n: Option<usize>,
    input: Option<PathBuf>,
) -> Result<MetricFamily, BenchError> {
    let need_n =
        || n.ok_or_else(|| BenchError::Usage("--n is required for generated families".into()));
    Ok(match a.family {
        FamilyArg::Discrete => MetricFamily::Discrete { n: need_n()? },
        FamilyArg::EuclideanUniform => MetricFamily::EuclideanUniform {
            n: need_n()?,
            dim: a.dim,
        },
        FamilyArg::EuclideanClustered => MetricFamily::EuclideanClustered {
            n: need_n()?,
            dim: a.dim,
            clusters: a.clusters,
            spread: a.spread,
        },
        FamilyArg::Explicit => MetricFamily::Explicit {
            path: input.ok_or_else(|| {
                BenchError::Usage("--input is required for the explicit family".into())
            })?,
        },
    })
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run(a) => {
            let input = a.input.clone();
            let mut spec = ExperimentSpec::new(
                solver(a.solver),
                family(&a.family, a.n, input)?,
                a.epsilon,
                a.trials,
                a.seed,
            );
            spec.mode = mode(a.mode);
            spec.format = match a.format {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Csv => OutputFormat::Csv,
            };
            spec.out = a.out;
            let start = Instant::now();
            let report = run_experiment(&spec)?;
            let s = &report.summary;
            eprintln!(
                "{} trials in {:.3}s: mean queries {:.1}, mean iterations {:.3}, max ratio {}, fallback {:.3}, guard {:.3}",
                s.trials,
                start.elapsed().as_secs_f64(),
                s.mean_queries,
                s.mean_iterations,
                s.max_ratio.map_or("n/a".to_string(), |r| format!("{r:.6}")),
                s.fraction_fallback,
                s.fraction_guard,
            );
            if spec.out.is_none() {
                std::io::stdout().write_all(&render_report(&report, spec.format)?)?;
            }
        }
        Command::Exact { input } => {
            let oracle = read_matrix_file(&input, DEFAULT_MATRIX_CAP)?;
            let best = brute_force_median(&oracle);
            println!(
                "{}",
                serde_json::json!({
                    "point": best.point,
                    "cost": best.cost,
                    "queries": oracle.query_count(),
                })
            );
        }
        Command::Scaling(a) => {
            let specs = a
                .sizes
                .iter()
                .map(|&n| {
                    let mut spec = ExperimentSpec::new(
                        solver(a.solver),
                        family(&a.family, Some(n), None)?,
                        a.epsilon,
                        a.trials,
                        a.seed,
                    );
                    spec.mode = mode(a.mode);
                    Ok(spec)
                })
                .collect::<Result<Vec<_>, BenchError>>()?;
            print!("{}", query_scaling_report(&specs)?.to_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
