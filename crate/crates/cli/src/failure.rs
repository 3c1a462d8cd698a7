use std::fmt;
use std::path::Path;

use dequip::Error;

/// Why a command stopped, and the exit code that reports it.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Lib(Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Failure::Io(format!("{}: {err}", path.display()))
    }

    /// 2 usage, 3 I/O, 4 numerical, 5 capacity.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Lib(e) => match e {
                Error::Validation(_) | Error::Lookup { .. } => 2,
                Error::Format { .. } | Error::Io { .. } => 3,
                Error::Capacity(_) => 5,
                Error::Bounds { .. }
                | Error::Coverage { .. }
                | Error::NoConvergence { .. }
                | Error::Singularity { .. } => 4,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Io(m) => write!(f, "i/o: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;
