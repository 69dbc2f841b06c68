use std::fmt;

/// Operational failure, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    /// Library errors raised while handling user-supplied data.
    pub fn from_data(err: hdcp::Error) -> Self {
        match err {
            hdcp::Error::SingularDesign { .. } => Failure::Numerical(err.to_string()),
            hdcp::Error::InvalidConfig(_) => Failure::Usage(err.to_string()),
            _ => Failure::Data(err.to_string()),
        }
    }

    /// Library errors raised while running a configured experiment, where
    /// every input comes from the config.
    pub fn from_config(err: hdcp::Error) -> Self {
        match err {
            hdcp::Error::SingularDesign { .. } => Failure::Numerical(err.to_string()),
            _ => Failure::Usage(err.to_string()),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Failure::Data(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}
