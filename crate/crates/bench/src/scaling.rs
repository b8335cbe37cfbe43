//! Mean query counts across input sizes and their log-log slope.

use serde::{Deserialize, Serialize};

use crate::experiment::{run_experiment, ExperimentSpec};
use crate::BenchError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub mean_queries: f64,
    pub queries_per_n: f64,
    pub queries_per_n2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln(mean queries)` against `ln(n)`.
    pub slope: f64,
}

/// Runs each spec (ratio checks off unless the spec sets a cap) and fits
/// the slope. Needs at least three distinct sizes.
pub fn query_scaling_report(specs: &[ExperimentSpec]) -> Result<ScalingReport, BenchError> {
    let sizes: Vec<Option<usize>> = specs.iter().map(|s| s.family.size_hint()).collect();
    let mut distinct: Vec<usize> = sizes.iter().flatten().copied().collect();
    distinct.sort_unstable();
    distinct.dedup();
    if sizes.iter().any(Option::is_none) || distinct.len() < 3 {
        return Err(BenchError::Usage(format!(
            "scaling needs at least 3 distinct generated sizes, got {distinct:?}"
        )));
    }

    let mut rows = Vec::new();
    for spec in specs {
        let mut spec = spec.clone();
        spec.ratio_check_cap.get_or_insert(0);
        let report = run_experiment(&spec)?;
        let n = report.trials[0].n;
        let q = report.summary.mean_queries;
        rows.push(ScalingRow {
            n,
            mean_queries: q,
            queries_per_n: q / n as f64,
            queries_per_n2: q / (n as f64 * n as f64),
        });
    }
    rows.sort_by_key(|r| r.n);
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean_queries.max(1.0).ln()))
        .collect();
    Ok(ScalingReport {
        slope: fit_slope(&points),
        rows,
    })
}

/// Ordinary least-squares slope.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

impl ScalingReport {
    /// Plain-text table with the slope on the last line.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>8} {:>16} {:>12} {:>12}\n",
            "n", "mean_queries", "queries/n", "queries/n^2"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>8} {:>16.1} {:>12.3} {:>12.6}\n",
                r.n, r.mean_queries, r.queries_per_n, r.queries_per_n2
            ));
        }
        out.push_str(&format!("slope {:.4}\n", self.slope));
        out
    }
}
