use std::fmt;

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// A check in a verification suite failed.
    Verification(String),
    /// Unreadable or unwritable file, or malformed input.
    Io(String),
    Library(ripjl::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Io(_) => 2,
            CliError::Library(e) => match e {
                ripjl::Error::Resource(_) => 4,
                ripjl::Error::Numeric(_) => 1,
                ripjl::Error::Dimension(_)
                | ripjl::Error::Parameter(_)
                | ripjl::Error::Range { .. } => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(msg) => write!(f, "verification failed: {msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<ripjl::Error> for CliError {
    fn from(e: ripjl::Error) -> Self {
        CliError::Library(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
