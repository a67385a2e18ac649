use thiserror::Error;

/// Every failure the library can report. The `code()` strings are stable and
/// appear verbatim in CLI reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("orbit-overflow: floating range exceeded after iterate {last_finite}")]
    OrbitOverflow { last_finite: usize },

    #[error("radius-too-small: R = {radius} is below the escape radius {escape_radius}")]
    RadiusTooSmall { radius: f64, escape_radius: f64 },

    #[error("undecided: orbit neither escaped nor stayed confined within {budget} iterations")]
    Undecided { budget: usize },

    #[error("not-in-Vplus: point lies outside V+ of radius {radius}")]
    NotInVplus { radius: f64 },

    #[error("path-too-wild: {0}")]
    PathTooWild(String),

    #[error("path-leaves-Uplus: sample {index} is not certified to escape")]
    PathLeavesUplus { index: usize },

    #[error("path-leaves-level: sample {index} has G+ = {value} (+/- {error_bound}), not below {level}")]
    PathLeavesLevel {
        index: usize,
        value: f64,
        error_bound: f64,
        level: f64,
    },

    #[error("endpoint-undecided: {0}")]
    EndpointUndecided(String),

    #[error("endpoint-outside: {0}")]
    EndpointOutside(String),

    #[error("inconsistent-seed: Re(seed) = {seed_re} but G+ = {green} at path start")]
    InconsistentSeed { seed_re: f64, green: f64 },

    #[error("q-coefficients-unavailable: Q is only known for degree 2 and 3, got {degree}")]
    QCoefficientsUnavailable { degree: u32 },

    #[error("not-in-annulus: |zeta| = {modulus} is outside (1, e^{level})")]
    NotInAnnulus { modulus: f64, level: f64 },

    #[error("invalid-model-aut: {0}")]
    InvalidModelAut(String),

    #[error("bad-grid: {0}")]
    BadGrid(String),

    #[error("bad-level: {0}")]
    BadLevel(String),

    #[error("invalid-map: {0}")]
    InvalidMap(String),

    #[error("invalid-input: {0}")]
    InvalidInput(String),

    #[error("not-representable: {0}")]
    NotRepresentable(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OrbitOverflow { .. } => "orbit-overflow",
            Error::RadiusTooSmall { .. } => "radius-too-small",
            Error::Undecided { .. } => "undecided",
            Error::NotInVplus { .. } => "not-in-Vplus",
            Error::PathTooWild(_) => "path-too-wild",
            Error::PathLeavesUplus { .. } => "path-leaves-Uplus",
            Error::PathLeavesLevel { .. } => "path-leaves-level",
            Error::EndpointUndecided(_) => "endpoint-undecided",
            Error::EndpointOutside(_) => "endpoint-outside",
            Error::InconsistentSeed { .. } => "inconsistent-seed",
            Error::QCoefficientsUnavailable { .. } => "q-coefficients-unavailable",
            Error::NotInAnnulus { .. } => "not-in-annulus",
            Error::InvalidModelAut(_) => "invalid-model-aut",
            Error::BadGrid(_) => "bad-grid",
            Error::BadLevel(_) => "bad-level",
            Error::InvalidMap(_) => "invalid-map",
            Error::InvalidInput(_) => "invalid-input",
            Error::NotRepresentable(_) => "not-representable",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
