use qreset_core::Error;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Numerical(Error),
    #[error("target {target} is not reached from state(s) {states:?}: {detail}")]
    Disconnected {
        target: usize,
        states: Vec<usize>,
        detail: String,
    },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    states: Option<&'a [usize]>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(Error::Singular { .. } | Error::MeasurementCap { .. }) => 4,
            CliError::Numerical(_) => 3,
            CliError::Disconnected { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            4 => "disconnected",
            _ => "numerical",
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        let states = match self {
            CliError::Disconnected { states, .. } => Some(states.as_slice()),
            CliError::Numerical(Error::Singular { disconnected }) => Some(disconnected.as_slice()),
            CliError::Numerical(Error::MeasurementCap { start, .. }) => {
                Some(std::slice::from_ref(start))
            }
            _ => None,
        };
        serde_json::to_string(&ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            states,
        })
        .expect("serializable")
    }
}
