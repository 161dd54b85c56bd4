use std::fmt;
use std::path::PathBuf;

use fbar_core::Error as CoreError;

/// Where in a configuration file a problem was found.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub line: Option<usize>,
    pub field: Option<String>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(line), Some(field)) => write!(f, "line {line}, field `{field}`"),
            (Some(line), None) => write!(f, "line {line}"),
            (None, Some(field)) => write!(f, "field `{field}`"),
            (None, None) => write!(f, "configuration"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{source_name}: {location}: {message}")]
    Config {
        source_name: String,
        location: Location,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    /// A synthesis that has no physical solution, with guidance on where one exists.
    #[error("{0}")]
    Unphysical(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 1,
            CliError::Unphysical(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Domain { .. } => 1,
                CoreError::InsufficientStatistics { .. } => 4,
                CoreError::DegenerateLoading { .. }
                | CoreError::UnphysicalCapacitance { .. }
                | CoreError::UnphysicalInductance { .. }
                | CoreError::NoConvergence { .. }
                | CoreError::Consistency { .. } => 2,
            },
            CliError::Io { .. } => 3,
        }
    }
}

/// Short machine-readable code for a core error, used in warnings and sweep rows.
pub fn error_code(e: &CoreError) -> &'static str {
    match e {
        CoreError::Domain { .. } => "domain",
        CoreError::DegenerateLoading { .. } => "degenerate_loading",
        CoreError::UnphysicalCapacitance { .. } => "unphysical_capacitance",
        CoreError::UnphysicalInductance { .. } => "unphysical_inductance",
        CoreError::NoConvergence { .. } => "no_convergence",
        CoreError::InsufficientStatistics { .. } => "insufficient_statistics",
        CoreError::Consistency { .. } => "consistency",
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
