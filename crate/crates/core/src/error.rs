use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("UT below the horizon: (R_s/R_e)*sin(nadir) = {0} > 1")]
    BelowHorizon(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("pilot capacity exceeded: requested {requested} pilots, at most {max} fit")]
    PilotCapacity { requested: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("Toeplitz matrix is not positive definite: |reflection| = {magnitude} at step {index}")]
    NotPositiveDefinite { index: usize, magnitude: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short label used to tag failed rows in sweep output.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Domain(_) => "domain",
            Self::BelowHorizon(_) => "below_horizon",
            Self::Parameter(_) => "parameter",
            Self::PilotCapacity { .. } => "pilot_capacity",
            Self::Dimension(_) => "dimension",
            Self::Singular(_) => "singular",
            Self::NotPositiveDefinite { .. } => "not_positive_definite",
            Self::Config(_) => "config",
            Self::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
