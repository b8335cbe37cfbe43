//! Brute-force ground truth: costs, the exact 1-median and approximation ratios.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metric::{MetricOracle, PointId};

/// Cost of a point alongside the optimum it is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub point: PointId,
    pub cost: f64,
    pub optimal_cost: f64,
    pub ratio: f64,
}

impl CostSummary {
    fn new(point: PointId, cost: f64, optimal_cost: f64) -> Self {
        CostSummary {
            point,
            cost,
            optimal_cost,
            ratio: ratio(cost, optimal_cost),
        }
    }
}

/// `cost / optimal`, with `0 / 0` taken as 1: when the optimum is zero every
/// point coincides and is optimal.
pub fn ratio(cost: f64, optimal_cost: f64) -> f64 {
    if optimal_cost > 0.0 {
        cost / optimal_cost
    } else {
        1.0
    }
}

/// `sum_x d(y, x)` with `n - 1` queries; the self-distance is taken as 0.
pub fn cost(oracle: &MetricOracle, y: PointId) -> Result<f64> {
    let y = oracle.check(y)?;
    Ok(row_cost(oracle, y))
}

pub(crate) fn row_cost(oracle: &MetricOracle, y: usize) -> f64 {
    (0..oracle.len())
        .filter(|&x| x != y)
        .map(|x| oracle.distance(y, x))
        .sum()
}

/// Exact 1-median by full scan; ties go to the smallest index.
/// Uses `n (n - 1)` queries.
pub fn brute_force_median(oracle: &MetricOracle) -> CostSummary {
    let mut best = (0, f64::INFINITY);
    for y in 0..oracle.len() {
        let c = row_cost(oracle, y);
        if c < best.1 {
            best = (y, c);
        }
    }
    CostSummary::new(PointId::from_zero_based(best.0), best.1, best.1)
}

/// Cost of `p` relative to the brute-force optimum.
pub fn approximation_ratio(oracle: &MetricOracle, p: PointId) -> Result<CostSummary> {
    let c = cost(oracle, p)?;
    let best = brute_force_median(oracle);
    Ok(CostSummary::new(p, c, best.cost))
}
