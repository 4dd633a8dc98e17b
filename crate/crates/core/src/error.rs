use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised while building a scenario, its channels, or its noise model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("{link}: angle {angle_deg:.4} deg lies outside the array front hemisphere")]
    FrontHemisphere { link: String, angle_deg: f64 },

    #[error("frequency {frequency_hz} Hz outside absorption table range [{min_hz}, {max_hz}] Hz")]
    FrequencyOutOfRange {
        frequency_hz: f64,
        min_hz: f64,
        max_hz: f64,
    },

    #[error("invalid absorption table: {0}")]
    InvalidTable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Geometry(_) | Error::FrontHemisphere { .. } => "geometry",
            Error::FrequencyOutOfRange { .. } | Error::InvalidTable(_) => "absorption",
            Error::InvalidParameter(_) => "parameter",
            Error::Dimension(_) => "dimension",
            Error::Config(_) | Error::Toml(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
