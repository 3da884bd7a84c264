use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing column(s) in header: {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("malformed rows at line(s) {}: {detail}", join_lines(.lines))]
    MalformedRows { lines: Vec<u64>, detail: String },

    #[error("duplicate key ({country}, {sector}, {year}) with conflicting values")]
    DuplicateKey {
        country: String,
        sector: String,
        year: i32,
    },

    #[error("unknown {kind} code(s): {}", .codes.join(", "))]
    UnknownCodes { kind: &'static str, codes: Vec<String> },

    #[error("sector code(s) not mapped by taxonomy: {}", .0.join(", "))]
    UnmappedCodes(Vec<String>),

    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),

    #[error("country not assigned to a group: {0}")]
    UnlabeledCountry(String),

    #[error("year {0} not present in panel")]
    YearAbsent(i32),

    #[error("no employment recorded for year {0}")]
    EmptyYear(i32),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("inconsistent degree sequences: {0}")]
    InconsistentDegrees(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("enumeration over 2^{cells} networks exceeds the bound of 2^{limit}")]
    TooLarge { cells: usize, limit: usize },

    #[error("at least {required} samples required, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("variable not available: {0}")]
    MissingVariable(String),

    #[error("column {0} has zero variance and cannot be standardized")]
    DegenerateColumn(String),

    #[error("design matrix is rank deficient; collinear column(s): {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("cluster-robust errors need at least 2 clusters, got {0}")]
    TooFewClusters(usize),

    #[error("empty estimation sample: {0}")]
    EmptySample(String),
}

fn join_lines(lines: &[u64]) -> String {
    lines.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::NonConvergence { .. } => 3,
            _ => 2,
        }
    }
}
