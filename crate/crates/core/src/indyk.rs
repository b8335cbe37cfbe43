//! Monte Carlo (1+eps)-approximate 1-median by sampled costs.
//!
//! Draws a uniform sample `S` of `m = ceil(c / eps^2)` points with replacement
//! and returns `argmin_y sum_{x in S} d(y, x)` over all `n` candidates. The
//! work is `n * m` queries minus the skipped self-queries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricOracle, PointId};

/// Calibrated sample constant `c`; see the calibration notes in the README.
pub const DEFAULT_SAMPLE_CONSTANT: f64 = 64.0;

/// Samples larger than this are refused rather than allocated.
pub const MAX_SAMPLE_SIZE: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndykConfig {
    pub epsilon: f64,
    pub sample_constant: f64,
    pub seed: u64,
}

impl IndykConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        IndykConfig {
            epsilon,
            sample_constant: DEFAULT_SAMPLE_CONSTANT,
            seed,
        }
    }

    pub fn with_sample_constant(mut self, c: f64) -> Self {
        self.sample_constant = c;
        self
    }

    /// `m = ceil(c / eps^2)`, saturating at `u64::MAX`.
    pub fn sample_size(&self) -> u64 {
        sample_size(self.epsilon, self.sample_constant)
    }

    pub fn validate(&self) -> Result<()> {
        validate(self.epsilon, self.sample_constant)
    }
}

pub(crate) fn sample_size(epsilon: f64, sample_constant: f64) -> u64 {
    let m = (sample_constant / (epsilon * epsilon)).ceil();
    // `as` saturates; NaN cannot occur for validated inputs.
    (m as u64).max(1)
}

pub(crate) fn validate(epsilon: f64, sample_constant: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if !(sample_constant > 0.0 && sample_constant.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sample constant must be positive and finite, got {sample_constant}"
        )));
    }
    Ok(())
}

/// Runs the sampled-cost argmin with a generator seeded from `config.seed`.
pub fn indyk_median(oracle: &MetricOracle, config: &IndykConfig) -> Result<PointId> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    sampled_median(oracle, config.sample_size(), &mut rng)
}

/// Sampled-cost argmin with an `m`-point sample drawn from `rng`.
/// Ties go to the smallest index.
pub fn sampled_median<R: Rng + ?Sized>(
    oracle: &MetricOracle,
    m: u64,
    rng: &mut R,
) -> Result<PointId> {
    let n = oracle.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    if m > MAX_SAMPLE_SIZE {
        return Err(Error::InvalidParameter(format!(
            "sample size {m} exceeds the limit of {MAX_SAMPLE_SIZE}"
        )));
    }
    let sample: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();

    let mut best = (0, f64::INFINITY);
    for y in 0..n {
        let c: f64 = sample
            .iter()
            .filter(|&&x| x != y)
            .map(|&x| oracle.distance(y, x))
            .sum();
        if c < best.1 {
            best = (y, c);
        }
    }
    Ok(PointId::from_zero_based(best.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force_median;

    #[test]
    fn sample_size_formula() {
        assert_eq!(IndykConfig::new(1.0, 0).sample_size(), 64);
        assert_eq!(IndykConfig::new(0.5, 0).sample_size(), 256);
        assert_eq!(
            IndykConfig::new(3.0, 0)
                .with_sample_constant(1.0)
                .sample_size(),
            1
        );
        assert_eq!(IndykConfig::new(1e-10, 0).sample_size(), u64::MAX);
    }

    #[test]
    fn discrete_returns_most_sampled_point() {
        // Under d_1 the sampled cost of y is m minus the multiplicity of y in
        // the sample, so the winner is the most frequent sample point (ties to
        // the smallest index).
        let n = 30;
        let d = MetricOracle::discrete(n).unwrap();
        for seed in 0..20 {
            let cfg = IndykConfig::new(1.0, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0usize; n];
            for _ in 0..cfg.sample_size() {
                counts[rng.random_range(0..n)] += 1;
            }
            let top = *counts.iter().max().unwrap();
            let want = counts.iter().position(|&c| c == top).unwrap();
            let got = indyk_median(&d, &cfg).unwrap();
            assert_eq!(got, PointId::from_zero_based(want));
        }
    }

    #[test]
    fn single_point() {
        let d = MetricOracle::discrete(1).unwrap();
        assert_eq!(
            indyk_median(&d, &IndykConfig::new(0.3, 9)).unwrap(),
            PointId::new(1)
        );
        assert_eq!(d.query_count(), 0);
    }

    #[test]
    fn query_count_is_nm_minus_self_hits() {
        let o = MetricOracle::euclidean(1, vec![0.0, 1.0, 10.0, 4.0]).unwrap();
        let cfg = IndykConfig::new(1.0, 3).with_sample_constant(5.0);
        indyk_median(&o, &cfg).unwrap();
        // Every sampled point coincides with exactly one candidate.
        assert_eq!(o.query_count(), 4 * 5 - 5);
    }

    #[test]
    fn deterministic_given_seed() {
        let o = crate::generate::generate_metric(
            &crate::generate::MetricFamily::EuclideanUniform { n: 80, dim: 2 },
            1,
        )
        .unwrap();
        let cfg = IndykConfig::new(2.0, 17).with_sample_constant(1.0);
        let a = indyk_median(&o, &cfg).unwrap();
        let b = indyk_median(&o, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn line_mostly_finds_the_median() {
        let o = MetricOracle::euclidean(1, vec![0.0, 1.0, 10.0]).unwrap();
        let best = brute_force_median(&o).point;
        let hits = (0..1000)
            .filter(|&seed| indyk_median(&o, &IndykConfig::new(1.0, seed)).unwrap() == best)
            .count();
        assert!(hits >= 900, "{hits} / 1000");
    }

    #[test]
    fn rejects_bad_config() {
        let d = MetricOracle::discrete(3).unwrap();
        assert!(indyk_median(&d, &IndykConfig::new(0.0, 0)).is_err());
        assert!(indyk_median(&d, &IndykConfig::new(1.0, 0).with_sample_constant(-1.0)).is_err());
        assert!(indyk_median(&d, &IndykConfig::new(1e-9, 0)).is_err());
    }
}
