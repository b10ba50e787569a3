use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lagwin_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    /// Malformed input file contents.
    #[error("{0}")]
    Input(String),
    /// Invalid combination of options.
    #[error("{0}")]
    Config(String),
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const NUMERIC: u8 = 4;
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        use lagwin_core::Error as C;
        match self {
            Error::Core(C::NonStudentizable(_) | C::NotPositiveDefinite(_)) => exit::NUMERIC,
            Error::Core(C::Dimension(_)) => exit::INPUT,
            Error::Core(_) | Error::Config(_) => exit::CONFIG,
            Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } | Error::Input(_) => exit::INPUT,
        }
    }
}
