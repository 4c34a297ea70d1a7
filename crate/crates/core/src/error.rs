use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("working mode index {0} is outside 1..=8")]
    InvalidMode(i64),
    #[error("pose is outside the workspace (leg {leg} misses its rail by {excess})")]
    UnreachablePose { leg: usize, excess: f64 },
    #[error("direct-kinematics matrix is singular (scaled |det A| = {margin})")]
    ParallelSingular { margin: f64 },
    #[error("inverse-kinematics matrix is singular (min |m_i| = {margin})")]
    SerialSingular { margin: f64 },
    #[error("characteristic length vanishes (sin gamma = {sin_gamma})")]
    DegenerateLength { sin_gamma: f64 },
    #[error("no centered symmetric configuration: l = {l} <= |R - r| = {gap}")]
    NoSymmetricConfig { l: f64, gap: f64 },
    #[error("position ({x}, {y}) is unreachable for every sampled orientation")]
    UnreachablePosition { x: f64, y: f64 },
    #[error("scan region does not contain the reachable set (needs half-width {needed})")]
    RegionTooSmall { needed: f64 },
    #[error("field has no reachable cell")]
    EmptyWorkspace,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Format(String),
}

impl Error {
    /// Stable variant name, used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "InvalidGeometry",
            Error::InvalidMode(_) => "InvalidMode",
            Error::UnreachablePose { .. } => "UnreachablePose",
            Error::ParallelSingular { .. } => "ParallelSingular",
            Error::SerialSingular { .. } => "SerialSingular",
            Error::DegenerateLength { .. } => "DegenerateLength",
            Error::NoSymmetricConfig { .. } => "NoSymmetricConfig",
            Error::UnreachablePosition { .. } => "UnreachablePosition",
            Error::RegionTooSmall { .. } => "RegionTooSmall",
            Error::EmptyWorkspace => "EmptyWorkspace",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Format(_) => "FormatError",
        }
    }
}
