use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        CliError::Invariant(msg.into())
    }

    /// 1 for bad input (including violated preconditions), 2 for a breach
    /// detected while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Invariant(_) => 2,
        }
    }
}

impl From<kt_measure::Error> for CliError {
    fn from(e: kt_measure::Error) -> Self {
        match e {
            kt_measure::Error::Invariant(msg) => CliError::Invariant(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Fails with an invariant error when `value` exceeds `tol`.
pub fn ensure_within(what: &str, value: f64, tol: f64) -> CliResult<()> {
    if value.is_nan() || value > tol {
        return Err(CliError::invariant(format!("{what} = {value:.3e} exceeds {tol:.0e}")));
    }
    Ok(())
}
