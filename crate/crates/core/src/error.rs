use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("circle radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error(
        "interface is tangent to segment ({ax}, {ay})-({bx}, {by}) near parameter {lambda:.6}; refine the mesh"
    )]
    TangentialContact {
        ax: f64,
        ay: f64,
        bx: f64,
        by: f64,
        lambda: f64,
    },
    #[error("point ({x}, {y}) lies on the interface (level-set value {value:e})")]
    OnInterface { x: f64, y: f64, value: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("background mesh needs at least 2 subdivisions per axis, got {0}")]
    TooCoarse(usize),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("background triangle {triangle} is cut on all three edges; refine n")]
    ThreeEdgeCut { triangle: usize },
    #[error("background triangle {triangle}: {reason}; refine n")]
    IsolatedVertexTouch { triangle: usize, reason: String },
    #[error("background edge {edge} is crossed twice by the interface; refine n")]
    DoubleEdgeCut { edge: usize },
    #[error("interface polyline is not a union of closed interior loops: {0}")]
    NonClosedInterfacePolyline(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("degenerate triangle (area {area:e})")]
    DegenerateTriangle { area: f64 },
    #[error("quadrilateral basis is ill-conditioned (condition estimate {condition:e})")]
    IllConditionedBasis { condition: f64 },
    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),
    #[error("cut ratios out of range: s = {s}, t = {t} (need 0 < s <= t < 1)")]
    InvalidCutRatios { s: f64, t: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("viscosities must be positive, got mu1 = {mu1}, mu2 = {mu2}")]
    NonPositiveViscosity { mu1: f64, mu2: f64 },
    #[error(transparent)]
    Element(#[from] ElementError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("tolerance must lie in (0, 1e-6], got {0:e}")]
    InvalidTolerance(f64),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("eigensolve failed: {0}")]
    EigensolveFailure(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
