use std::path::{Path, PathBuf};

use bpae_core::Error as CoreError;

/// Process exit statuses by failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const FORMAT: i32 = 3;
    pub const COMPATIBILITY: i32 = 4;
    pub const NUMERIC: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    Exists(PathBuf),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: CoreError },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Exists(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::InFile { source, .. } | CliError::Core(source) => core_code(source),
        }
    }
}

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::InvalidArgument(_) => exit::USAGE,
        CoreError::Format(_) | CoreError::Ingest { .. } | CoreError::Csv(_) => exit::FORMAT,
        CoreError::Compatibility(_) | CoreError::Shape(_) => exit::COMPATIBILITY,
        CoreError::DegenerateSignal(_)
        | CoreError::SingularFit(_)
        | CoreError::Length { .. }
        | CoreError::Unlabelable(_)
        | CoreError::UndefinedCorrelation(_)
        | CoreError::Numeric(_) => exit::NUMERIC,
        CoreError::Io(_) => exit::IO,
    }
}

/// Attaches the offending file to errors from a core reader.
pub trait WithPath<T> {
    fn at(self, path: &Path) -> Result<T, CliError>;
}

impl<T> WithPath<T> for Result<T, CoreError> {
    fn at(self, path: &Path) -> Result<T, CliError> {
        self.map_err(|source| CliError::InFile {
            path: path.to_path_buf(),
            source,
        })
    }
}
