//! Exact moments of the random matching sum and the max-square-sum bound.
//!
//! For a ball `B` and a uniformly random bijection onto it, let `X` be the
//! sum of `d(u, v)` over the `floor(|B| / 2)` consecutive pairs. Each pair is
//! a uniform ordered 2-tuple of distinct members and any two pairs form a
//! uniform ordered 4-tuple of distinct members, which gives `E[X]` and
//! `E[X^2]` in closed form. Nothing here is asymptotic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricOracle, PointId};

/// Symmetric distance table over a ball, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceTable {
    /// Queries every unordered pair of `members` once.
    pub fn fetch(oracle: &MetricOracle, members: &[PointId]) -> Result<Self> {
        let idx = members
            .iter()
            .map(|&p| oracle.check(p))
            .collect::<Result<Vec<_>>>()?;
        let k = idx.len();
        let mut entries = vec![0.0; k * k];
        for a in 0..k {
            for b in a + 1..k {
                let d = oracle.distance(idx[a], idx[b]);
                entries[a * k + b] = d;
                entries[b * k + a] = d;
            }
        }
        Ok(DistanceTable { size: k, entries })
    }

    /// Builds a table from a full row-major matrix. The diagonal is forced to
    /// zero and the matrix must be symmetric.
    pub fn from_matrix(size: usize, mut entries: Vec<f64>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for a {size}-point table",
                size * size
            )));
        }
        for a in 0..size {
            entries[a * size + a] = 0.0;
            for b in a + 1..size {
                if entries[a * size + b] != entries[b * size + a] {
                    return Err(Error::Asymmetric {
                        row: a + 1,
                        col: b + 1,
                        forward: entries[a * size + b],
                        backward: entries[b * size + a],
                    });
                }
            }
        }
        Ok(DistanceTable { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Distance between the `a`-th and `b`-th member (zero-based).
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.size + b]
    }

    pub fn max_distance(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// Average distance inside a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallStatistics {
    pub ball_size: usize,
    /// `sum_{u, v in B} d(u, v)` over ordered pairs.
    pub inner_sum: f64,
    /// `inner_sum / |B|^2`.
    pub r_prime: f64,
    pub table: DistanceTable,
}

/// Exact `r'` by full in-ball pair summation, `|B| (|B| - 1) / 2` queries.
pub fn mean_inner_distance(oracle: &MetricOracle, members: &[PointId]) -> Result<BallStatistics> {
    if members.is_empty() {
        return Err(Error::Empty);
    }
    Ok(ball_statistics(DistanceTable::fetch(oracle, members)?))
}

pub fn ball_statistics(table: DistanceTable) -> BallStatistics {
    let k = table.size();
    let inner_sum: f64 = table.entries.iter().sum();
    let r_prime = if k == 0 {
        0.0
    } else {
        inner_sum / (k * k) as f64
    };
    BallStatistics {
        ball_size: k,
        inner_sum,
        r_prime,
        table,
    }
}

fn pair_count(k: usize) -> f64 {
    (k / 2) as f64
}

/// `E[X] = floor(|B|/2) * inner_sum / (|B| (|B| - 1))`; zero below two members.
pub fn pairing_sum_mean(stats: &BallStatistics) -> f64 {
    let k = stats.ball_size;
    if k < 2 {
        return 0.0;
    }
    pair_count(k) * stats.inner_sum / (k as f64 * (k - 1) as f64)
}

/// Exact second-moment decomposition of the matching sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub exact_mean: f64,
    /// `sum_{i != j} E[d_i d_j]`.
    pub exact_second_moment_cross: f64,
    /// `sum_i E[d_i^2]`.
    pub exact_second_moment_diag: f64,
    /// `cross + diag - mean^2`, clamped at zero against rounding.
    pub variance: f64,
}

/// `sum` over ordered 4-tuples of distinct members of `d(u, v) d(x, y)`.
///
/// Equals `S^2 - 4 sum_u R_u^2 + 2 Q` with `S` the ordered pair sum, `R_u`
/// the row sums and `Q` the ordered sum of squares: subtract the products
/// whose pairs share a member (inclusion-exclusion over the four possible
/// coincidences; only `u=x, v=y` and `u=y, v=x` can hold together).
pub fn distinct_quadruple_sum(table: &DistanceTable) -> f64 {
    let k = table.size();
    let mut s = 0.0;
    let mut q = 0.0;
    let mut rows = 0.0;
    for a in 0..k {
        let mut row = 0.0;
        for b in 0..k {
            let d = table.get(a, b);
            row += d;
            q += d * d;
        }
        s += row;
        rows += row * row;
    }
    s * s - 4.0 * rows + 2.0 * q
}

pub fn pairing_sum_moments(stats: &BallStatistics) -> MomentReport {
    let k = stats.ball_size;
    let mean = pairing_sum_mean(stats);
    if k < 2 {
        return MomentReport {
            exact_mean: 0.0,
            exact_second_moment_cross: 0.0,
            exact_second_moment_diag: 0.0,
            variance: 0.0,
        };
    }
    let kf = k as f64;
    let pairs = pair_count(k);
    let squares: f64 = stats.table.entries.iter().map(|d| d * d).sum();
    let diag = pairs * squares / (kf * (kf - 1.0));
    let cross = if k < 4 {
        0.0
    } else {
        pairs * (pairs - 1.0) * distinct_quadruple_sum(&stats.table)
            / (kf * (kf - 1.0) * (kf - 2.0) * (kf - 3.0))
    };
    MomentReport {
        exact_mean: mean,
        exact_second_moment_cross: cross,
        exact_second_moment_diag: diag,
        variance: (cross + diag - mean * mean).max(0.0),
    }
}

/// Parameters of the max-square-sum relaxation: maximise
/// `floor(k/2) / (k (k-1)) * sum d_uv^2` over `k^2` entries in `[0, cap]`
/// averaging `r'`, where `cap = 2 delta n r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareSumProblem {
    pub ball_size: usize,
    pub r_prime: f64,
    pub delta: f64,
    pub n: usize,
    pub r: f64,
}

impl SquareSumProblem {
    pub fn cap(&self) -> f64 {
        2.0 * self.delta * self.n as f64 * self.r
    }

    /// `k^2 r'`, the total the entries must sum to.
    pub fn mass(&self) -> f64 {
        let k = self.ball_size as f64;
        k * k * self.r_prime
    }

    /// `floor(k/2) / (k (k - 1))`.
    pub fn objective_scale(&self) -> f64 {
        let k = self.ball_size as f64;
        pair_count(self.ball_size) / (k * (k - 1.0))
    }

    /// Objective value of an assignment of the `k^2` entries.
    pub fn objective(&self, entries: &[f64]) -> f64 {
        self.objective_scale() * entries.iter().map(|d| d * d).sum::<f64>()
    }

    /// `floor(mass / cap)`: how many entries fit at the cap.
    fn full_entries(&self) -> f64 {
        (self.mass() / self.cap()).floor()
    }

    fn check(&self) -> Result<()> {
        if self.ball_size < 2 {
            return Err(Error::InvalidParameter(
                "max square sum needs a ball of at least two points".into(),
            ));
        }
        if !(self.r_prime >= 0.0 && self.r_prime.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r' must be finite and nonnegative, got {}",
                self.r_prime
            )));
        }
        Ok(())
    }
}

/// Upper bound on the optimum:
/// `floor(k/2) / (k (k-1)) * (floor(k^2 r' / cap) + 1) * cap^2`.
/// Zero for a degenerate cap.
pub fn max_square_sum_bound(problem: &SquareSumProblem) -> Result<f64> {
    problem.check()?;
    let cap = problem.cap();
    if cap.is_nan() || cap <= 0.0 {
        return Ok(0.0);
    }
    Ok(problem.objective_scale() * (problem.full_entries() + 1.0) * cap * cap)
}

/// The extremal feasible assignment: as many entries at the cap as the mass
/// allows, one remainder entry, zeros elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyAssignment {
    pub entries: Vec<f64>,
    pub objective: f64,
}

pub fn max_square_sum_greedy(problem: &SquareSumProblem) -> Result<GreedyAssignment> {
    problem.check()?;
    let k2 = problem.ball_size * problem.ball_size;
    let cap = problem.cap();
    let mass = problem.mass();
    if cap.is_nan() || cap <= 0.0 {
        if mass > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mass {mass} cannot fit under a zero cap"
            )));
        }
        let entries = vec![0.0; k2];
        return Ok(GreedyAssignment {
            objective: 0.0,
            entries,
        });
    }
    if mass > k2 as f64 * cap {
        return Err(Error::InvalidParameter(format!(
            "infeasible: mass {mass} exceeds {k2} entries at cap {cap}"
        )));
    }
    let full = (problem.full_entries() as usize).min(k2);
    let mut entries = vec![0.0; k2];
    entries[..full].iter_mut().for_each(|e| *e = cap);
    if full < k2 {
        entries[full] = (mass - full as f64 * cap).clamp(0.0, cap);
    }
    let objective = problem.objective(&entries);
    Ok(GreedyAssignment { entries, objective })
}
