use thiserror::Error;

/// A command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
            Self::Numeric(_) => 4,
        }
    }

    pub fn data(e: impl std::fmt::Display) -> Self {
        Self::Data(e.to_string())
    }
}

fn root(e: &hitrocket::Error) -> &hitrocket::Error {
    match e {
        hitrocket::Error::Series { source, .. } => root(source),
        other => other,
    }
}

impl From<hitrocket::Error> for CliError {
    fn from(e: hitrocket::Error) -> Self {
        use hitrocket::Error as E;
        let message = e.to_string();
        match root(&e) {
            E::InvalidOrder(_) | E::KernelIndex { .. } | E::InvalidScheme(_) | E::Config(_) | E::Io(_) => {
                Self::Usage(message)
            }
            E::Numeric(_) => Self::Numeric(message),
            _ => Self::Data(message),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
