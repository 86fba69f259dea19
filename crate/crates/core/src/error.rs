use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An integration step produced a NaN or infinity.
    #[error("non-finite value in {component} at t = {t} s")]
    NonFinite { t: f64, component: String },

    /// A caller broke a precondition of a numerical routine.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration failed validation before a run started.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A configuration file could not be parsed.
    #[error("config parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
