use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped the way callers react to them: `Domain` and
/// `Config` are input problems, `Numerical`, `SingularDesign`, `DegenerateFit`
/// and `Oracle` are runtime failures, and `Io`/`Format` concern persisted data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: String, detail: String },

    #[error("invalid configuration `{field}`: {detail}")]
    Config { field: String, detail: String },

    #[error("incomplete beta did not converge for a={a}, b={b}, x={x}")]
    Numerical { a: f64, b: f64, x: f64 },

    #[error("singular design: column {column} is linearly dependent on earlier columns")]
    SingularDesign { column: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("power oracle failed at chromosome {chromosome:?}: {source}")]
    Oracle {
        chromosome: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("grid of {size} points exceeds the budget of {budget}")]
    GridBudget { size: u128, budget: u128 },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("malformed data at line {line}: {detail}")]
    Format { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Domain {
            what: what.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
