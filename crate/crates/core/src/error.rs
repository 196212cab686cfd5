use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid point count {0} is odd")]
    OddPointCount(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field shapes do not match: {0}")]
    ShapeMismatch(String),
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("dilation would push {lost:.3e} of the mass outside the box")]
    SupportOverflow { lost: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("the dilation ray has no finite maximum")]
    NoMaximizer,
    #[error("degenerate scalar triple: {0}")]
    Degenerate(&'static str),
    #[error("quotient undefined for the zero field")]
    ZeroField,
    #[error("multiplier undefined for zero mass")]
    ZeroMass,

    #[error("seed field is zero")]
    ZeroSeed,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("iterates collapsed to zero")]
    DivergedToZero,
    #[error("mass {mass} is at or below the critical mass {critical}")]
    SubcriticalMass { mass: f64, critical: f64 },
    #[error("no multiplier bracket for mass {mass}: scanned alpha in [{alpha_lo:.4e}, {alpha_hi:.4e}], masses in [{mass_lo:.6e}, {mass_hi:.6e}]")]
    BracketNotFound {
        mass: f64,
        alpha_lo: f64,
        alpha_hi: f64,
        mass_lo: f64,
        mass_hi: f64,
    },
    #[error("seed violates the finiteness condition gamma*A < C/(sigma+1)")]
    SeedOutsideDomain,
    #[error("solvers disagree at mass {mass}: {first} vs {second}")]
    CrossValidation { mass: f64, first: f64, second: f64 },
    #[error("resolution limit: {0}")]
    ResolutionLimit(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("at mass {mass}: {source}")]
    AtMass {
        mass: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("bad checkpoint magic")]
    BadMagic,
    #[error("checkpoint truncated: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at line {line} (key `{key}`): {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes reported by the command-line runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Solver,
    Resolution,
    Io,
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorCategory::Config => "ConfigError",
            ErrorCategory::Solver => "SolverError",
            ErrorCategory::Resolution => "ResolutionError",
            ErrorCategory::Io => "IoError",
        };
        f.write_str(s)
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            AtMass { source, .. } => source.category(),
            OddPointCount(_) | InvalidGrid(_) | InvalidModel(_) | Parse { .. } | Validation(_) => {
                ErrorCategory::Config
            }
            SupportOverflow { .. } | ResolutionLimit(_) => ErrorCategory::Resolution,
            BadMagic | TruncatedFile { .. } | DimensionMismatch(_) | Io(_) => ErrorCategory::Io,
            _ => ErrorCategory::Solver,
        }
    }

    /// Process exit code used by the CLI for this error's category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            ErrorCategory::Config => 2,
            ErrorCategory::Solver => 3,
            ErrorCategory::Resolution => 4,
            ErrorCategory::Io => 5,
        }
    }
}
