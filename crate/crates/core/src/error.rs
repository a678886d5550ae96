use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("route has no waypoints")]
    EmptyRoute,

    #[error("route is degenerate: {0}")]
    DegenerateRoute(String),

    #[error("point ({x:.2}, {y:.2}, {z:.2}) lies inside the building below the roof")]
    InsideBuilding { x: f64, y: f64, z: f64 },

    #[error("route intersects the building footprint")]
    RouteIntersectsBuilding,

    #[error("route is fully masked by terrain")]
    RouteFullyMasked,

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("telemetry time is not monotonic on line {line}")]
    NonMonotonicTelemetry { line: u64 },

    #[error("offset unobservable: {0}")]
    OffsetUnobservable(String),

    #[error("logs do not overlap: {matched} of {total} samples have telemetry within tolerance")]
    LogsDoNotOverlap { matched: usize, total: usize },

    #[error("degenerate regression subset: {0}")]
    DegenerateFit(String),

    #[error("truncation bound {bound:.2} m leaves {points} points, need at least {min}")]
    InsufficientPoints { bound: f64, points: usize, min: usize },

    #[error("no selected model in regression result")]
    NoSelectedModel,

    #[error("unsupported limit: {0}")]
    UnsupportedLimit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
