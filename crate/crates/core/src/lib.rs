//! Metric 1-median selection over a query-counted distance oracle.
//!
//! - [`metric`]: the oracle, point ids and axiom validation.
//! - [`generate`]: synthetic families and the explicit matrix format.
//! - [`exact`]: brute-force costs and the exact median.
//! - [`indyk`]: Monte Carlo (1+eps)-approximation by sampled costs.
//! - [`lasvegas`]: the certificate-checked (2+eps)-approximation loop.
//! - [`analysis`]: exact moments of the random matching sum.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod generate;
pub mod indyk;
pub mod lasvegas;
pub mod metric;

pub use error::{Error, Result};
pub use exact::{approximation_ratio, brute_force_median, cost, CostSummary};
pub use generate::{generate_metric, MetricFamily};
pub use indyk::{indyk_median, IndykConfig};
pub use lasvegas::{
    delta_from_epsilon, las_vegas_median, las_vegas_median_observed, Certificate, LasVegasConfig,
    Mode, RunReport,
};
pub use metric::{validate_metric, MetricOracle, PointId, Violation};
