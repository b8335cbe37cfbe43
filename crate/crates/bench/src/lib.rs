//! Experiment runner for the metric 1-median solvers: seeded trials,
//! brute-force ratio checks, JSON/CSV reports and query-scaling fits.

pub mod experiment;
pub mod scaling;

pub use experiment::{
    read_report, render_report, run_experiment, summarize, write_report, AggregateReport,
    ExperimentSpec, OutputFormat, Solver, Summary, TrialRecord, DEFAULT_RATIO_CHECK_CAP,
    RATIO_CHECK_CAP_ENV,
};
pub use scaling::{fit_slope, query_scaling_report, ScalingReport, ScalingRow};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Bad flags, specs or inputs; the CLI exits with status 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] median_core::Error),
    #[error("trial {trial}: ratio {ratio} exceeds 2 + {epsilon}")]
    Guarantee {
        trial: usize,
        ratio: f64,
        epsilon: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn is_usage(&self) -> bool {
        use median_core::Error as E;
        match self {
            BenchError::Usage(_) => true,
            BenchError::Core(e) => matches!(
                e,
                E::Io { .. }
                    | E::Parse(_)
                    | E::InvalidParameter(_)
                    | E::Empty
                    | E::MatrixCapExceeded { .. }
                    | E::InvalidEntry { .. }
                    | E::Asymmetric { .. }
            ),
            _ => false,
        }
    }
}
