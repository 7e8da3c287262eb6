use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] powerga::Error),

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: powerga::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration file {}: {detail}", path.display())]
    ConfigFile { path: PathBuf, detail: String },

    #[error("invalid configuration `{field}`: {detail}")]
    Invalid { field: String, detail: String },
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;
pub const EXIT_IO: u8 = 4;

impl CliError {
    pub fn invalid(field: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_file(path: impl Into<PathBuf>, source: powerga::Error) -> Self {
        match source {
            powerga::Error::Io(e) => CliError::io(path, e),
            source => CliError::InFile {
                path: path.into(),
                source,
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::InFile { source: e, .. } => core_exit_code(e),
            CliError::Io { .. } => EXIT_IO,
            CliError::ConfigFile { .. } | CliError::Invalid { .. } => EXIT_VALIDATION,
        }
    }
}

fn core_exit_code(e: &powerga::Error) -> u8 {
    use powerga::Error::*;
    match e {
        Domain { .. } | Config { .. } | GridBudget { .. } | Structure(_) | Format { .. } => EXIT_VALIDATION,
        Numerical { .. } | SingularDesign { .. } | DegenerateFit(_) | Oracle { .. } => EXIT_RUNTIME,
        Io(_) => EXIT_IO,
        Json(j) if j.is_io() => EXIT_IO,
        Json(_) => EXIT_VALIDATION,
        Csv(c) if c.is_io_error() => EXIT_IO,
        Csv(_) => EXIT_VALIDATION,
    }
}
