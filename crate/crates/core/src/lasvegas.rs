//! Las Vegas (2+eps)-approximate 1-median.
//!
//! Each iteration picks a candidate `z` with the sampled-cost subroutine,
//! measures its average distance `r`, shuffles the open ball around `z` into
//! disjoint pairs and accepts `z` only if
//!
//! ```text
//! sum_pairs d(u, v) + sum_{x outside ball} (d(z, x) - 8r) >= (1 - 100 sqrt(delta)) n r / 2
//! ```
//!
//! where `2 + eps = 2 / (1 - 100 sqrt(delta))`. Whenever the inequality holds,
//! `z` is (2+eps)-approximate no matter how `z` was chosen or which ball was
//! paired: points at distance at least `8r` from `z` cost at least `7 cost(z)`,
//! and every other point costs at least the left-hand side by the triangle
//! inequality. The ball radius therefore only affects how often the check
//! passes, never what a passing check certifies.
//!
//! Small inputs go straight to brute force, and a run that would exceed its
//! query budget (default `n^2`) falls back to brute force too, so every run
//! returns a (2+eps)-approximate point.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::brute_force_median;
use crate::indyk::{self, sampled_median};
use crate::metric::{MetricOracle, PointId};

/// Faithful inner accuracy is `eps / 1e10`.
pub const FAITHFUL_INNER_DIVISOR: f64 = 1e10;
/// Practical inner accuracy is `eps / 10`.
pub const PRACTICAL_INNER_DIVISOR: f64 = 10.0;
/// Sample constant for the candidate search in practical mode.
pub const PRACTICAL_SAMPLE_CONSTANT: f64 = 1.0;
/// Practical mode never lets the ball radius drop below this many `r`.
pub const PRACTICAL_BALL_RADIUS_FLOOR: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Constants exactly as derived: inner accuracy `eps / 1e10` and ball
    /// radius `delta n r`.
    Faithful,
    /// Inner accuracy `eps / 10` and ball radius `max(delta n r, 8 r)`.
    Practical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LasVegasConfig {
    pub epsilon: f64,
    pub mode: Mode,
    /// Accuracy handed to the candidate search.
    pub inner_epsilon: f64,
    /// Sample constant of the candidate search (`m = ceil(c / inner_eps^2)`).
    pub sample_constant: f64,
    /// Lower bound on the ball radius in units of `r`; `None` uses `delta n r`
    /// as is.
    pub ball_radius_floor: Option<f64>,
    /// Query budget before brute force takes over; `None` means `n^2`.
    pub max_query_budget: Option<u64>,
    pub seed: u64,
}

impl LasVegasConfig {
    pub fn faithful(epsilon: f64, seed: u64) -> Self {
        LasVegasConfig {
            epsilon,
            mode: Mode::Faithful,
            inner_epsilon: epsilon / FAITHFUL_INNER_DIVISOR,
            sample_constant: indyk::DEFAULT_SAMPLE_CONSTANT,
            ball_radius_floor: None,
            max_query_budget: None,
            seed,
        }
    }

    pub fn practical(epsilon: f64, seed: u64) -> Self {
        LasVegasConfig {
            epsilon,
            mode: Mode::Practical,
            inner_epsilon: epsilon / PRACTICAL_INNER_DIVISOR,
            sample_constant: PRACTICAL_SAMPLE_CONSTANT,
            ball_radius_floor: Some(PRACTICAL_BALL_RADIUS_FLOOR),
            max_query_budget: None,
            seed,
        }
    }

    pub fn new(epsilon: f64, mode: Mode, seed: u64) -> Self {
        match mode {
            Mode::Faithful => Self::faithful(epsilon, seed),
            Mode::Practical => Self::practical(epsilon, seed),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Query budget for an `n`-point input.
    pub fn budget(&self, n: usize) -> u64 {
        self.max_query_budget
            .unwrap_or_else(|| (n as u64).saturating_mul(n as u64))
    }

    /// Ball radius parameter: the radius is `ball_delta * n * r`.
    pub fn ball_delta(&self, n: usize) -> Result<f64> {
        let delta = delta_from_epsilon(self.epsilon)?;
        Ok(match self.ball_radius_floor {
            Some(floor) => delta.max(floor / n as f64),
            None => delta,
        })
    }

    /// Whether an `n`-point input is small enough for brute force outright:
    /// `n < ceil(1 / ball_delta) + 4`.
    pub fn guard_applies(&self, n: usize) -> Result<bool> {
        let threshold = (1.0 / self.ball_delta(n)?).ceil() + 4.0;
        Ok((n as f64) < threshold)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        delta_from_epsilon(self.epsilon)?;
        indyk::validate(self.inner_epsilon, self.sample_constant)?;
        if let Some(floor) = self.ball_radius_floor {
            if !(floor > 0.0 && floor.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "ball radius floor must be positive, got {floor}"
                )));
            }
        }
        if self.budget(n) < n as u64 {
            return Err(Error::InvalidParameter(format!(
                "query budget {} is below n = {n}",
                self.budget(n)
            )));
        }
        Ok(())
    }
}

/// The unique `delta > 0` with `2 + eps = 2 / (1 - 100 sqrt(delta))`,
/// i.e. `(eps / (100 (2 + eps)))^2`.
pub fn delta_from_epsilon(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let root = epsilon / (100.0 * (2.0 + epsilon));
    Ok(root * root)
}

/// Mean distance from `z` to all `n` points (`n - 1` queries).
pub fn average_distance(oracle: &MetricOracle, z: PointId) -> Result<f64> {
    let z = oracle.check(z)?;
    let row = distance_row(oracle, z);
    Ok(row.iter().sum::<f64>() / oracle.len() as f64)
}

/// The open ball `{y : d(z, y) < radius}` in increasing index order
/// (`n - 1` queries).
pub fn open_ball(oracle: &MetricOracle, z: PointId, radius: f64) -> Result<Vec<PointId>> {
    let z = oracle.check(z)?;
    let row = distance_row(oracle, z);
    Ok(ball_members(&row, radius))
}

fn distance_row(oracle: &MetricOracle, z: usize) -> Vec<f64> {
    (0..oracle.len())
        .map(|x| if x == z { 0.0 } else { oracle.distance(z, x) })
        .collect()
}

fn ball_members(row: &[f64], radius: f64) -> Vec<PointId> {
    row.iter()
        .enumerate()
        .filter(|(_, &d)| d < radius)
        .map(|(i, _)| PointId::from_zero_based(i))
        .collect()
}

/// One iteration's view of the candidate `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSnapshot {
    pub z: PointId,
    /// Average distance from `z`.
    pub r: f64,
    /// Solution of the epsilon/delta relation; sets the certificate threshold.
    pub delta: f64,
    /// Radius parameter; equals `delta` in faithful mode.
    pub ball_delta: f64,
    /// `ball_delta * n * r`.
    pub radius: f64,
    /// `B(z, radius)` in increasing index order.
    pub members: Vec<PointId>,
    /// `d(z, x)` for every `x`, zero-based.
    pub distances: Vec<f64>,
}

impl BallSnapshot {
    /// Fetches the `n - 1` distances from `z` and builds the ball.
    pub fn observe(oracle: &MetricOracle, z: PointId, delta: f64, ball_delta: f64) -> Result<Self> {
        let zi = oracle.check(z)?;
        let distances = distance_row(oracle, zi);
        let n = oracle.len() as f64;
        let r = distances.iter().sum::<f64>() / n;
        let radius = ball_delta * n * r;
        let members = ball_members(&distances, radius);
        Ok(BallSnapshot {
            z,
            r,
            delta,
            ball_delta,
            radius,
            members,
            distances,
        })
    }

    pub fn n(&self) -> usize {
        self.distances.len()
    }

    /// Points outside the ball with their distance from `z`.
    pub fn outside(&self) -> impl Iterator<Item = (PointId, f64)> + '_ {
        let radius = self.radius;
        self.distances
            .iter()
            .enumerate()
            .filter(move |(_, &d)| d >= radius)
            .map(|(i, &d)| (PointId::from_zero_based(i), d))
    }

    /// Upper bound `2 * radius` on any distance between two ball members.
    pub fn distance_cap(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Disjoint pairs drawn from a shuffled ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub pairs: Vec<(PointId, PointId)>,
    pub leftover: Option<PointId>,
}

/// Shuffles `members` (Fisher-Yates) and pairs consecutive entries.
pub fn random_pairing<R: Rng + ?Sized>(members: &[PointId], rng: &mut R) -> Pairing {
    let mut order = members.to_vec();
    order.shuffle(rng);
    let pairs = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let leftover = (order.len() % 2 == 1).then(|| order[order.len() - 1]);
    Pairing { pairs, leftover }
}

/// Both sides of the acceptance inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub matching_sum: f64,
    pub outside_sum: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// Evaluates the acceptance inequality. Issues one query per pair; the
/// outside terms reuse `snapshot.distances`.
pub fn certificate_check(
    oracle: &MetricOracle,
    snapshot: &BallSnapshot,
    pairing: &Pairing,
) -> Certificate {
    debug_assert!(pairing
        .pairs
        .iter()
        .all(|(u, v)| snapshot.members.binary_search(u).is_ok()
            && snapshot.members.binary_search(v).is_ok()));
    let matching_sum: f64 = pairing
        .pairs
        .iter()
        .map(|(u, v)| oracle.distance(u.zero_based(), v.zero_based()))
        .sum();
    let far = 8.0 * snapshot.r;
    let outside_sum: f64 = snapshot.outside().map(|(_, d)| d - far).sum();
    let lhs = matching_sum + outside_sum;
    let n = snapshot.n() as f64;
    let rhs = (1.0 - 100.0 * snapshot.delta.sqrt()) * n * snapshot.r / 2.0;
    Certificate {
        matching_sum,
        outside_sum,
        lhs,
        rhs,
        passed: lhs >= rhs,
    }
}

/// Outcome of one run.
///
/// Exactly one of `certificate`, `fallback_used` and `guard_used` explains
/// the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub output: PointId,
    pub iterations: usize,
    pub total_queries: u64,
    pub fallback_used: bool,
    pub guard_used: bool,
    pub certificate: Option<Certificate>,
    pub seed: u64,
}

impl RunReport {
    /// Whether exactly one explanation is present.
    pub fn is_explained(&self) -> bool {
        let certified = self.certificate.is_some_and(|c| c.passed);
        [certified, self.fallback_used, self.guard_used]
            .iter()
            .filter(|&&b| b)
            .count()
            == 1
            && (self.certificate.is_none() || certified)
    }
}

/// Everything one loop iteration saw, for observers.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub snapshot: BallSnapshot,
    pub pairing: Pairing,
    pub certificate: Certificate,
}

/// Runs the Las Vegas loop.
pub fn las_vegas_median(oracle: &MetricOracle, config: &LasVegasConfig) -> Result<RunReport> {
    las_vegas_median_observed(oracle, config, |_| {})
}

/// [`las_vegas_median`] with a callback invoked after every certificate
/// check. Observers that need distances should query a clone of the oracle
/// so the run's accounting stays intact.
pub fn las_vegas_median_observed<F>(
    oracle: &MetricOracle,
    config: &LasVegasConfig,
    mut observer: F,
) -> Result<RunReport>
where
    F: FnMut(&IterationRecord),
{
    let n = oracle.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    config.validate(n)?;
    let start = oracle.query_count();
    let used = || oracle.query_count() - start;
    let brute_force = |iterations: usize, guard: bool| {
        let best = brute_force_median(oracle);
        RunReport {
            output: best.point,
            iterations,
            total_queries: used(),
            fallback_used: !guard,
            guard_used: guard,
            certificate: None,
            seed: config.seed,
        }
    };

    if config.guard_applies(n)? {
        return Ok(brute_force(0, true));
    }

    let delta = delta_from_epsilon(config.epsilon)?;
    let ball_delta = config.ball_delta(n)?;
    let m = indyk::sample_size(config.inner_epsilon, config.sample_constant);
    let n64 = n as u64;
    let per_iteration = n64
        .saturating_mul(m)
        .saturating_add(n64 - 1)
        .saturating_add(n64 / 2);
    let budget = config.budget(n);

    let mut iterations = 0;
    loop {
        if used().saturating_add(per_iteration) > budget {
            return Ok(brute_force(iterations, false));
        }
        iterations += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(iterations as u64);

        let z = sampled_median(oracle, m, &mut rng)?;
        let snapshot = BallSnapshot::observe(oracle, z, delta, ball_delta)?;
        let pairing = random_pairing(&snapshot.members, &mut rng);
        let certificate = certificate_check(oracle, &snapshot, &pairing);
        let record = IterationRecord {
            iteration: iterations,
            snapshot,
            pairing,
            certificate,
        };
        observer(&record);
        if certificate.passed {
            return Ok(RunReport {
                output: z,
                iterations,
                total_queries: used(),
                fallback_used: false,
                guard_used: false,
                certificate: Some(certificate),
                seed: config.seed,
            });
        }
    }
}
