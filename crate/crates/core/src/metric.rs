//! Distance oracle with query accounting.
//!
//! Points are addressed by [`PointId`], a 1-based index into `[n]`. Every
//! call to [`MetricOracle::query`] counts as one distance evaluation, including
//! self-queries; the algorithms in this crate avoid self-queries themselves.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `n` for the O(n^3) metric validator.
pub const DEFAULT_VALIDATION_CAP: usize = 512;

/// Relative slack allowed on the triangle inequality when validating
/// floating-point metrics (collinear Euclidean points round either way).
const TRIANGLE_RELATIVE_SLACK: f64 = 1e-9;

/// A point of `[n] = {1, ..., n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(usize);

impl PointId {
    /// Creates a point id from its 1-based index.
    ///
    /// # Panics
    /// If `index` is zero.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "point indices are 1-based");
        PointId(index)
    }

    pub fn from_zero_based(i: usize) -> Self {
        PointId(i + 1)
    }

    /// The 1-based index.
    pub fn index(self) -> usize {
        self.0
    }

    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where the distances come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Backing {
    /// Row-major `n x n` matrix.
    Matrix { n: usize, entries: Vec<f64> },
    /// `n` points in `R^dim`, row-major coordinates.
    Euclidean { dim: usize, coords: Vec<f64> },
    /// `d(x, y) = 1` for `x != y`.
    Discrete { n: usize },
}

impl Backing {
    fn len(&self) -> usize {
        match self {
            Backing::Matrix { n, .. } | Backing::Discrete { n } => *n,
            Backing::Euclidean { dim, coords } => coords.len() / dim,
        }
    }

    #[inline]
    fn distance(&self, i: usize, j: usize) -> f64 {
        match self {
            Backing::Matrix { n, entries } => entries[i * n + j],
            Backing::Euclidean { dim, coords } => {
                let a = &coords[i * dim..(i + 1) * dim];
                let b = &coords[j * dim..(j + 1) * dim];
                a.iter()
                    .zip(b)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt()
            }
            Backing::Discrete { .. } => {
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// A distance oracle over `[n]` that counts every evaluation.
///
/// Reads are thread-safe; the counter is atomic, so the count observed after
/// concurrent use equals the total number of calls.
#[derive(Debug)]
pub struct MetricOracle {
    backing: Backing,
    queries: AtomicU64,
}

impl Clone for MetricOracle {
    /// Clones the distances with a fresh query counter.
    fn clone(&self) -> Self {
        MetricOracle::from_backing(self.backing.clone())
    }
}

impl MetricOracle {
    fn from_backing(backing: Backing) -> Self {
        MetricOracle {
            backing,
            queries: AtomicU64::new(0),
        }
    }

    /// The discrete metric `d_1` on `n` points.
    pub fn discrete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self::from_backing(Backing::Discrete { n }))
    }

    /// Euclidean points in `R^dim`, given row-major.
    pub fn euclidean(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if coords.is_empty() {
            return Err(Error::Empty);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(Self::from_backing(Backing::Euclidean { dim, coords }))
    }

    /// An explicit distance matrix (row-major, `n x n`).
    ///
    /// Entries must be finite, nonnegative and symmetric. The diagonal and the
    /// triangle inequality are not checked here; see [`validate_metric`].
    pub fn from_matrix(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if entries.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} matrix entries, got {}",
                n * n,
                entries.len()
            )));
        }
        for row in 0..n {
            for col in 0..n {
                let value = entries[row * n + col];
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::InvalidEntry {
                        row: row + 1,
                        col: col + 1,
                        value,
                    });
                }
                if col > row {
                    let backward = entries[col * n + row];
                    if value != backward {
                        return Err(Error::Asymmetric {
                            row: row + 1,
                            col: col + 1,
                            forward: value,
                            backward,
                        });
                    }
                }
            }
        }
        Ok(Self::from_backing(Backing::Matrix { n, entries }))
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.backing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    /// Returns `d(x, y)` and counts one query.
    pub fn query(&self, x: PointId, y: PointId) -> Result<f64> {
        let (i, j) = (self.check(x)?, self.check(y)?);
        Ok(self.distance(i, j))
    }

    /// Bounds-checks `p` without issuing a query; returns its zero-based index.
    pub fn check(&self, p: PointId) -> Result<usize> {
        let n = self.len();
        if p.index() > n {
            return Err(Error::PointOutOfRange {
                index: p.index(),
                n,
            });
        }
        Ok(p.zero_based())
    }

    /// Counted distance on zero-based indices. Panics on out-of-range input.
    #[inline]
    pub(crate) fn distance(&self, i: usize, j: usize) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.backing.distance(i, j)
    }

    /// Number of distance evaluations so far.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_query_count(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    /// The full distance matrix, row-major. Costs `n^2` queries.
    pub fn to_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.distance(i, j));
            }
        }
        out
    }

    /// Iterator over all point ids.
    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (1..=self.len()).map(PointId::new)
    }
}

/// One violated axiom instance (1-based ids).
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `d(x, x) != 0`.
    Identity { x: PointId, value: f64 },
    /// `d(x, y) = 0` for `x != y` (reported once per unordered pair).
    Indiscernible { x: PointId, y: PointId },
    /// `d(x, y) != d(y, x)` (reported once per unordered pair).
    Symmetry { x: PointId, y: PointId },
    /// `d(x, y) + d(y, z) < d(x, z)` for pairwise distinct points, `x < z`.
    Triangle { x: PointId, y: PointId, z: PointId },
}

/// Checks all three metric axioms on every triple with the default cap.
pub fn validate_metric(oracle: &MetricOracle) -> Result<Vec<Violation>> {
    validate_metric_with_cap(oracle, DEFAULT_VALIDATION_CAP)
}

/// Checks all three metric axioms, refusing when `n > cap`.
///
/// Fetches the matrix once (`n^2` queries) and sweeps it in O(n^3).
pub fn validate_metric_with_cap(oracle: &MetricOracle, cap: usize) -> Result<Vec<Violation>> {
    let n = oracle.len();
    if n > cap {
        return Err(Error::ValidationCapExceeded { n, cap });
    }
    let d = oracle.to_matrix();
    let at = |i: usize, j: usize| d[i * n + j];
    let id = PointId::from_zero_based;
    let mut violations = Vec::new();

    for i in 0..n {
        if at(i, i) != 0.0 {
            violations.push(Violation::Identity {
                x: id(i),
                value: at(i, i),
            });
        }
        for j in i + 1..n {
            if at(i, j) != at(j, i) {
                violations.push(Violation::Symmetry { x: id(i), y: id(j) });
            }
            if at(i, j) == 0.0 || at(j, i) == 0.0 {
                violations.push(Violation::Indiscernible { x: id(i), y: id(j) });
            }
        }
    }
    for x in 0..n {
        for z in x + 1..n {
            let direct = at(x, z);
            let slack = TRIANGLE_RELATIVE_SLACK * direct;
            for y in (0..n).filter(|&y| y != x && y != z) {
                if at(x, y) + at(y, z) + slack < direct {
                    violations.push(Violation::Triangle {
                        x: id(x),
                        y: id(y),
                        z: id(z),
                    });
                }
            }
        }
    }
    Ok(violations)
}
