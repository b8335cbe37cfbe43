//! Seeded multi-trial experiments and their reports.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use median_core::exact::{cost, ratio};
use median_core::{
    brute_force_median, generate_metric, indyk_median, las_vegas_median, IndykConfig,
    LasVegasConfig, MetricFamily, MetricOracle, Mode, PointId, RunReport,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Brute-force ratio checks are skipped above this many points.
pub const DEFAULT_RATIO_CHECK_CAP: usize = 2000;
pub const RATIO_CHECK_CAP_ENV: &str = "MEDIAN_RATIO_CHECK_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exact,
    Indyk,
    Lasvegas,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub solver: Solver,
    pub family: MetricFamily,
    pub epsilon: f64,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Overrides the environment and default cap when set.
    #[serde(default)]
    pub ratio_check_cap: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(
        solver: Solver,
        family: MetricFamily,
        epsilon: f64,
        trials: usize,
        seed: u64,
    ) -> Self {
        ExperimentSpec {
            solver,
            family,
            epsilon,
            mode: Mode::Practical,
            trials,
            seed,
            out: None,
            format: OutputFormat::Json,
            ratio_check_cap: None,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Usage("trials must be at least 1".into()));
        }
        if self.solver != Solver::Exact && !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(BenchError::Usage(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// The cap in effect: the spec's own, else the environment, else the default.
    pub fn effective_ratio_cap(&self) -> Result<usize, BenchError> {
        if let Some(cap) = self.ratio_check_cap {
            return Ok(cap);
        }
        match std::env::var(RATIO_CHECK_CAP_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                BenchError::Usage(format!("{RATIO_CHECK_CAP_ENV}={v:?} is not a point count"))
            }),
            Err(_) => Ok(DEFAULT_RATIO_CHECK_CAP),
        }
    }

    /// Seeds for the instance and the solver of trial `trial`.
    pub fn trial_seeds(&self, trial: usize) -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        (rng.next_u64(), rng.next_u64())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub instance_seed: u64,
    pub n: usize,
    pub report: RunReport,
    pub cost: Option<f64>,
    pub optimal_cost: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    /// Trials with a measured ratio.
    pub checked: usize,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub mean_iterations: f64,
    pub mean_queries: f64,
    pub fraction_fallback: f64,
    pub fraction_guard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Runs every trial (in parallel), checks ratios where affordable and writes
/// the report when `spec.out` is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateReport, BenchError> {
    spec.validate()?;
    let cap = spec.effective_ratio_cap()?;
    // Explicit matrices are read once; every trial gets its own counter.
    let shared = match &spec.family {
        MetricFamily::Explicit { .. } => Some(generate_metric(&spec.family, 0)?),
        _ => None,
    };
    let trials = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, shared.as_ref(), t, cap))
        .collect::<Result<Vec<_>, _>>()?;

    if spec.solver == Solver::Lasvegas {
        for t in &trials {
            if let Some(r) = t.ratio {
                if r > 2.0 + spec.epsilon {
                    return Err(BenchError::Guarantee {
                        trial: t.trial,
                        ratio: r,
                        epsilon: spec.epsilon,
                    });
                }
            }
        }
    }

    let report = AggregateReport {
        spec: spec.clone(),
        summary: summarize(&trials),
        trials,
    };
    if let Some(path) = &spec.out {
        write_report(&report, path, spec.format)?;
    }
    Ok(report)
}

fn run_trial(
    spec: &ExperimentSpec,
    shared: Option<&MetricOracle>,
    trial: usize,
    cap: usize,
) -> Result<TrialRecord, BenchError> {
    let (instance_seed, run_seed) = spec.trial_seeds(trial);
    let oracle = match shared {
        Some(o) => o.clone(),
        None => generate_metric(&spec.family, instance_seed)?,
    };
    let n = oracle.len();
    let report = match spec.solver {
        Solver::Exact => {
            let best = brute_force_median(&oracle);
            plain_report(best.point, 0, &oracle, run_seed)
        }
        Solver::Indyk => {
            let p = indyk_median(&oracle, &IndykConfig::new(spec.epsilon, run_seed))?;
            plain_report(p, 1, &oracle, run_seed)
        }
        Solver::Lasvegas => {
            let cfg = LasVegasConfig::new(spec.epsilon, spec.mode, run_seed);
            las_vegas_median(&oracle, &cfg)?
        }
    };

    // Measured on a separate counter so the run's query count is untouched.
    let probe = oracle.clone();
    let optimal_cost = match spec.family {
        MetricFamily::Discrete { n } => Some(n.saturating_sub(1) as f64),
        _ if n <= cap => Some(brute_force_median(&probe).cost),
        _ => None,
    };
    let (c, r) = match optimal_cost {
        Some(opt) => {
            let c = cost(&probe, report.output)?;
            (Some(c), Some(ratio(c, opt)))
        }
        None => (None, None),
    };
    Ok(TrialRecord {
        trial,
        instance_seed,
        n,
        report,
        cost: c,
        optimal_cost,
        ratio: r,
    })
}

fn plain_report(output: PointId, iterations: usize, oracle: &MetricOracle, seed: u64) -> RunReport {
    RunReport {
        output,
        iterations,
        total_queries: oracle.query_count(),
        fallback_used: false,
        guard_used: false,
        certificate: None,
        seed,
    }
}

pub fn summarize(trials: &[TrialRecord]) -> Summary {
    let count = trials.len() as f64;
    let ratios: Vec<f64> = trials.iter().filter_map(|t| t.ratio).collect();
    let frac = |f: fn(&TrialRecord) -> bool| trials.iter().filter(|t| f(t)).count() as f64 / count;
    Summary {
        trials: trials.len(),
        checked: ratios.len(),
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        mean_iterations: trials
            .iter()
            .map(|t| t.report.iterations as f64)
            .sum::<f64>()
            / count,
        mean_queries: trials
            .iter()
            .map(|t| t.report.total_queries as f64)
            .sum::<f64>()
            / count,
        fraction_fallback: frac(|t| t.report.fallback_used),
        fraction_guard: frac(|t| t.report.guard_used),
    }
}

/// One flat CSV row per trial.
#[derive(Serialize)]
struct CsvRow {
    trial: usize,
    instance_seed: u64,
    seed: u64,
    n: usize,
    output: usize,
    iterations: usize,
    total_queries: u64,
    fallback_used: bool,
    guard_used: bool,
    certified: bool,
    cost: Option<f64>,
    optimal_cost: Option<f64>,
    ratio: Option<f64>,
}

pub fn render_report(
    report: &AggregateReport,
    format: OutputFormat,
) -> Result<Vec<u8>, BenchError> {
    match format {
        OutputFormat::Json => {
            let mut buf = serde_json::to_vec_pretty(report)?;
            buf.push(b'\n');
            Ok(buf)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for t in &report.trials {
                w.serialize(CsvRow {
                    trial: t.trial,
                    instance_seed: t.instance_seed,
                    seed: t.report.seed,
                    n: t.n,
                    output: t.report.output.index(),
                    iterations: t.report.iterations,
                    total_queries: t.report.total_queries,
                    fallback_used: t.report.fallback_used,
                    guard_used: t.report.guard_used,
                    certified: t.report.certificate.is_some_and(|c| c.passed),
                    cost: t.cost,
                    optimal_cost: t.optimal_cost,
                    ratio: t.ratio,
                })?;
            }
            w.into_inner().map_err(|e| BenchError::Io(e.into_error()))
        }
    }
}

/// Writes to a temporary file next to `path` and renames it into place.
pub fn write_report(
    report: &AggregateReport,
    path: &Path,
    format: OutputFormat,
) -> Result<(), BenchError> {
    let bytes = render_report(report, format)?;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.persist(path).map_err(|e| BenchError::Io(e.error))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<AggregateReport, BenchError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
