use thiserror::Error;

/// Errors raised anywhere in the deconvolution pipeline.
///
/// Every variant maps to a stable machine-readable code through
/// [`DeconvError::code`], which the CLI prints on stderr.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeconvError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("ill-posed deconvolution: |f_eps*| fell below {threshold:e} at x = {x}; use a smaller m")]
    IllPosed { x: f64, threshold: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("model index m = {m} exceeds the admissible maximum {m_max}")]
    Inadmissible { m: f64, m_max: f64 },

    #[error("infeasible model collection: {0}")]
    InfeasibleCollection(String),

    #[error("observation {index} is exactly zero; ln(Y^2) is undefined")]
    DegenerateObservation { index: usize },

    #[error("process is not stationary: {0}")]
    Nonstationary(String),

    #[error("simulation failed at t = {index}: {reason}")]
    Simulation { index: usize, reason: String },

    #[error("replication {replication}: {source}")]
    Replication {
        replication: usize,
        #[source]
        source: Box<DeconvError>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl DeconvError {
    pub fn code(&self) -> &'static str {
        match self {
            DeconvError::Config(_) => "CONFIG_ERROR",
            DeconvError::Domain(_) => "DOMAIN_ERROR",
            DeconvError::Numerical(_) => "NUMERICAL_ERROR",
            DeconvError::IllPosed { .. } => "ILL_POSED",
            DeconvError::Range(_) => "RANGE_ERROR",
            DeconvError::Inadmissible { .. } => "INADMISSIBLE_MODEL",
            DeconvError::InfeasibleCollection(_) => "INFEASIBLE_COLLECTION",
            DeconvError::DegenerateObservation { .. } => "DEGENERATE_OBSERVATION",
            DeconvError::Nonstationary(_) => "NONSTATIONARY",
            DeconvError::Simulation { .. } => "SIMULATION_ERROR",
            DeconvError::Replication { source, .. } => source.code(),
            DeconvError::Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for DeconvError {
    fn from(e: std::io::Error) -> Self {
        DeconvError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DeconvError>;
