use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A (d-1)-face is not shared by exactly two elements.
    NonManifold(String),
    /// Winding cannot be made consistent by one global flip.
    Orientation(String),
    InvalidParams(String),
    /// The operation needs element normals (or another mode) the mesh lacks.
    UnsupportedMode(String),
    DegenerateGeometry(String),
    NonGraphical(String),
    DegeneratePatch(String),
    DisconnectedMesh,
    Stall { iteration: usize, step: f64 },
    MeshDegeneration { iteration: usize, min_measure: f64 },
}

impl Error {
    /// Stable machine-readable name, used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonManifold(_) => "NonManifoldError",
            Error::Orientation(_) => "OrientationError",
            Error::InvalidParams(_) => "InvalidParams",
            Error::UnsupportedMode(_) => "UnsupportedMode",
            Error::DegenerateGeometry(_) => "DegenerateGeometry",
            Error::NonGraphical(_) => "NonGraphical",
            Error::DegeneratePatch(_) => "DegeneratePatch",
            Error::DisconnectedMesh => "DisconnectedMesh",
            Error::Stall { .. } => "StallError",
            Error::MeshDegeneration { .. } => "MeshDegenerationError",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonManifold(m) => write!(f, "non-manifold mesh: {m}"),
            Error::Orientation(m) => write!(f, "inconsistent orientation: {m}"),
            Error::InvalidParams(m) => write!(f, "invalid parameters: {m}"),
            Error::UnsupportedMode(m) => write!(f, "unsupported mode: {m}"),
            Error::DegenerateGeometry(m) => write!(f, "degenerate geometry: {m}"),
            Error::NonGraphical(m) => write!(f, "surface is not a graph: {m}"),
            Error::DegeneratePatch(m) => write!(f, "degenerate patch: {m}"),
            Error::DisconnectedMesh => write!(f, "mesh is not connected"),
            Error::Stall { iteration, step } => {
                write!(f, "descent stalled at iteration {iteration} (step {step:e})")
            }
            Error::MeshDegeneration { iteration, min_measure } => write!(
                f,
                "element measure collapsed to {min_measure:e} at iteration {iteration}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}
