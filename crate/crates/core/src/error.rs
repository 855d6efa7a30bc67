use thiserror::Error;

/// Which solve of a forward/backward pair failed to produce a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Forward => f.write_str("forward"),
            Direction::Backward => f.write_str("backward"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("parameter `{name}` out of range: {value}")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("degenerate triangle: adjacent side has zero length")]
    DegenerateTriangle,
    #[error("side lengths ({a}, {b}, {c}) violate the triangle inequality")]
    NotATriangle { a: f64, b: f64, c: f64 },
    #[error("geodesics do not share a common origin (gap {gap})")]
    OriginMismatch { gap: f64 },
    #[error("schedule needs at least 2 strictly decreasing positive entries")]
    ScheduleTooShort,
    #[error("unsupported convex set: {0}")]
    UnsupportedConvexSet(String),
    #[error("geodesic cannot be extended by {requested} (only {available} available)")]
    NotExtendable { requested: f64, available: f64 },
    #[error("geodesic has zero length")]
    DegenerateGeodesic,
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("point is {distance} away from the geodesic")]
    PointNotOnGeodesic { distance: f64 },
    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),
    #[error("shell half-width {eps} must lie in (0, {limit}]")]
    BadEpsilon { eps: f64, limit: f64 },
    #[error("probe point coincides with the center")]
    ProbeAtCenter,
    #[error("measure weights sum to {source_total} and {target_total}")]
    WeightMismatch { source_total: f64, target_total: f64 },
    #[error("support of size {size} exceeds the cap {cap}")]
    SupportTooLarge { size: usize, cap: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("{count} tuples exceed the exhaustive cap {cap}")]
    TooManyTuples { count: u128, cap: u128 },
    #[error("empty set")]
    EmptySet,
    #[error("no target support point inside the ball")]
    EmptyBall,
    #[error("grid node {index} lies on the boundary")]
    BoundaryPoint { index: usize },
    #[error("map undefined: {0}")]
    MapUndefined(String),
    #[error("{direction} plan is not deterministic (split mass {split_mass})")]
    NotDeterministic { direction: Direction, split_mass: f64 },
    #[error("inverse map does not invert the forward map (gap {gap})")]
    InverseMismatch { gap: f64 },
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("invalid config at `{path}`: {reason}")]
    ConfigInvalid { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_unit_interval(name: &'static str, t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange { name, value: t })
    }
}
