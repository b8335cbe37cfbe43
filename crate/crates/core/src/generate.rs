//! Synthetic metric families and the explicit-matrix file format.
//!
//! Matrix files are plain text: the first line holds `n`, followed by `n`
//! lines of `n` whitespace-separated nonnegative decimals, row `i` column `j`
//! being `d(i, j)`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Backing, MetricOracle};

/// Default cap on `n` for explicit matrices held in memory.
pub const DEFAULT_MATRIX_CAP: usize = 20_000;

/// A parameterised family of metrics. Combined with a seed by
/// [`generate_metric`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricFamily {
    /// The discrete metric on `n` points.
    Discrete { n: usize },
    /// `n` points uniform in `[0, 1)^dim`.
    EuclideanUniform { n: usize, dim: usize },
    /// `n` points around `clusters` centers uniform in `[0, 1)^dim`, with
    /// isotropic Gaussian noise of standard deviation `spread`. Cluster `j`
    /// (0-based) receives points with weight `1 / (j + 1)`.
    EuclideanClustered {
        n: usize,
        dim: usize,
        clusters: usize,
        spread: f64,
    },
    /// A matrix file in the format above.
    Explicit { path: PathBuf },
}

impl MetricFamily {
    /// Point count, when known without reading a file.
    pub fn size_hint(&self) -> Option<usize> {
        match self {
            MetricFamily::Discrete { n }
            | MetricFamily::EuclideanUniform { n, .. }
            | MetricFamily::EuclideanClustered { n, .. } => Some(*n),
            MetricFamily::Explicit { .. } => None,
        }
    }

    /// Whether every seed yields the same metric.
    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            MetricFamily::Discrete { .. } | MetricFamily::Explicit { .. }
        )
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match *self {
            MetricFamily::Discrete { n } | MetricFamily::EuclideanUniform { n, .. } if n == 0 => {
                Err(Error::Empty)
            }
            MetricFamily::EuclideanUniform { dim: 0, .. } => bad("dimension must be positive"),
            MetricFamily::EuclideanClustered {
                n,
                dim,
                clusters,
                spread,
            } => {
                if n == 0 {
                    Err(Error::Empty)
                } else if dim == 0 {
                    bad("dimension must be positive")
                } else if clusters == 0 {
                    bad("cluster count must be positive")
                } else if !(spread.is_finite() && spread >= 0.0) {
                    bad("cluster spread must be finite and nonnegative")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Builds the oracle for `family`. Deterministic for a fixed seed.
pub fn generate_metric(family: &MetricFamily, seed: u64) -> Result<MetricOracle> {
    family.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        MetricFamily::Discrete { n } => MetricOracle::discrete(*n),
        MetricFamily::EuclideanUniform { n, dim } => {
            let coords = (0..n * dim).map(|_| rng.random::<f64>()).collect();
            MetricOracle::euclidean(*dim, coords)
        }
        MetricFamily::EuclideanClustered {
            n,
            dim,
            clusters,
            spread,
        } => {
            let centers: Vec<f64> = (0..clusters * dim).map(|_| rng.random::<f64>()).collect();
            let weights = WeightedIndex::new((0..*clusters).map(|j| 1.0 / (j as f64 + 1.0)))
                .expect("positive weights");
            let noise = Normal::new(0.0, *spread)
                .map_err(|e| Error::InvalidParameter(format!("cluster spread: {e}")))?;
            let mut coords = Vec::with_capacity(n * dim);
            for _ in 0..*n {
                let c = weights.sample(&mut rng);
                for k in 0..*dim {
                    coords.push(centers[c * dim + k] + noise.sample(&mut rng));
                }
            }
            MetricOracle::euclidean(*dim, coords)
        }
        MetricFamily::Explicit { path } => read_matrix_file(path, DEFAULT_MATRIX_CAP),
    }
}

/// Parses the matrix text format. Rejects asymmetric or negative entries.
pub fn parse_matrix(text: &str, cap: usize) -> Result<MetricOracle> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header line with n".into()))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("header {:?} is not an integer", header.trim())))?;
    if n == 0 {
        return Err(Error::Empty);
    }
    if n > cap {
        return Err(Error::MatrixCapExceeded { n, cap });
    }
    let mut entries = Vec::with_capacity(n * n);
    for row in 1..=n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} rows, found {}", row - 1)))?;
        let before = entries.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: {tok:?} is not a number")))?;
            entries.push(v);
        }
        if entries.len() - before != n {
            return Err(Error::Parse(format!(
                "row {row} has {} entries, expected {n}",
                entries.len() - before
            )));
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("trailing content after {n} rows")));
    }
    MetricOracle::from_matrix(n, entries)
}

pub fn read_matrix_file(path: &Path, cap: usize) -> Result<MetricOracle> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text, cap)
}

/// Renders the oracle in the matrix text format. Values use the shortest
/// representation that parses back to the same `f64`.
///
/// Matrix-backed oracles are written without issuing queries; other backings
/// cost `n^2` queries.
pub fn format_matrix(oracle: &MetricOracle) -> String {
    let n = oracle.len();
    let owned;
    let entries = match oracle.backing() {
        Backing::Matrix { entries, .. } => entries,
        _ => {
            owned = oracle.to_matrix();
            &owned
        }
    };
    let mut out = format!("{n}\n");
    for row in entries.chunks(n) {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
