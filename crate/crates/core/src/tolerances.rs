//! Numerical tolerances shared by the library, the harness and the test suites.
//!
//! Every threshold below is a fixed contract value; suites must not loosen them.

/// Metric identities: triangle inequality, constant speed, point equality.
pub const METRIC: f64 = 1e-9;

/// Slack allowed on the triangle inequality before a comparison triangle is rejected.
pub const TRIANGLE_SLACK: f64 = 1e-12;

/// Weights of a discrete measure must sum to one within this.
pub const WEIGHT_SUM: f64 = 1e-12;

/// Plan marginals, duality gap and dual feasibility.
pub const MARGINAL: f64 = 1e-9;

/// Slack on one c-cyclical monotonicity inequality before it counts as a violation.
pub const CYCLE_SLACK: f64 = 1e-9;

/// Weight comparison for measure-preserving maps.
pub const WEIGHT_MATCH: f64 = 1e-12;

/// Convergence tolerance between successive comparison angles.
pub const ANGLE_CONVERGENCE: f64 = 1e-7;

/// Base differentiability tolerance, scaled by `1 + |D+| + |D-|`.
pub const DIFFERENTIABILITY: f64 = 1e-5;

/// Minimum derivative gap for the twist condition to count as distinguishing.
pub const TWIST_GAP: f64 = 1e-6;

/// Flows below this are treated as zero when reading a plan off the solver.
pub const FLOW_ZERO: f64 = 1e-14;
