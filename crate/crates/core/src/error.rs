use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("waveform: {0}")]
    Signal(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("unknown electrode `{0}`")]
    UnknownElectrode(String),

    #[error("potential solve did not converge after {iterations} iterations (residual {residual:.3e} V)")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("terminal `{0}` has no path to a grounded source")]
    DisconnectedTerminal(String),

    #[error("circuit: {0}")]
    Circuit(String),

    #[error(transparent)]
    Script(#[from] Diagnostic),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::DisconnectedTerminal(_) | Error::Circuit(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// A located problem in an experiment script.
#[derive(Debug, Error, Clone, PartialEq, Eq, serde::Serialize)]
#[error("line {line}: [{section}] {field}: {message}")]
pub struct Diagnostic {
    pub line: usize,
    pub section: String,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(
        line: usize,
        section: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            line,
            section: section.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}
