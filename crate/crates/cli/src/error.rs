use std::fmt;

/// Failure classes, one per process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unknown flags, malformed input files, invalid parameter combinations.
    BadArgs(String),
    /// A computation failed, or some points of a sweep did.
    Compute(String),
    /// Reading or writing files failed.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadArgs(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::BadArgs(m) => write!(f, "invalid arguments: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<otoc_lab::Error> for CliError {
    fn from(e: otoc_lab::Error) -> Self {
        use otoc_lab::Error as E;
        match e {
            E::InvalidParams(_) | E::CriticalPointZero | E::InvalidInput(_) | E::IndexOutOfRange { .. } => {
                CliError::BadArgs(e.to_string())
            }
            E::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
