//! Per-iteration checks of the structural facts behind the acceptance test.
//! Distances are re-fetched from a separate oracle so the run's own query
//! accounting is untouched.

use median_core::analysis::{
    max_square_sum_bound, mean_inner_distance, pairing_sum_moments, SquareSumProblem,
};
use median_core::lasvegas::IterationRecord;
use median_core::MetricOracle;

/// Relative slack for comparisons between independently rounded sums.
const ROUNDING: f64 = 1e-12;

/// Counts of each check performed, for reporting.
#[derive(Clone, Copy, Debug, Default)]
pub struct Checked {
    pub iterations: usize,
    pub far_points: usize,
}

/// Checks one iteration. `costs` holds the exact cost of every point
/// (zero-based) when the far-point check should run.
pub fn check_iteration(
    probe: &MetricOracle,
    rec: &IterationRecord,
    costs: Option<&[f64]>,
    tally: &mut Checked,
) -> Result<(), String> {
    let s = &rec.snapshot;
    let n = s.n();
    let it = rec.iteration;

    let outside = s.outside().count() as f64;
    if outside > 1.0 / s.ball_delta {
        return Err(format!(
            "iteration {it}: {outside} points outside the ball, limit {}",
            1.0 / s.ball_delta
        ));
    }

    let stats = mean_inner_distance(probe, &s.members).map_err(|e| e.to_string())?;
    if stats.r_prime > 2.0 * s.r * (1.0 + ROUNDING) {
        return Err(format!(
            "iteration {it}: inner average {} exceeds 2r = {}",
            stats.r_prime,
            2.0 * s.r
        ));
    }

    let k = stats.ball_size;
    for a in 0..k {
        for b in 0..k {
            let d = stats.table.get(a, b);
            if a != b && d >= s.distance_cap() {
                return Err(format!(
                    "iteration {it}: in-ball distance {d} reaches the cap {}",
                    s.distance_cap()
                ));
            }
        }
    }

    if k >= 2 {
        let moments = pairing_sum_moments(&stats);
        let problem = SquareSumProblem {
            ball_size: k,
            r_prime: stats.r_prime,
            delta: s.ball_delta,
            n,
            r: s.r,
        };
        let bound = max_square_sum_bound(&problem).map_err(|e| e.to_string())?;
        if moments.exact_second_moment_diag > bound * (1.0 + ROUNDING) {
            return Err(format!(
                "iteration {it}: diagonal second moment {} exceeds {bound}",
                moments.exact_second_moment_diag
            ));
        }
    }

    if let Some(costs) = costs {
        let cost_z = costs[s.z.zero_based()];
        for (x, d) in s.distances.iter().enumerate() {
            if *d >= 8.0 * s.r {
                tally.far_points += 1;
                if costs[x] < 7.0 * cost_z * (1.0 - ROUNDING) {
                    return Err(format!(
                        "iteration {it}: far point {} costs {} < 7 * {cost_z}",
                        x + 1,
                        costs[x]
                    ));
                }
            }
        }
    }
    tally.iterations += 1;
    Ok(())
}
