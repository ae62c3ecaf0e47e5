//! Error types shared by all modules.

use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map onto the process exit codes used by the `precs` binary:
/// configuration problems exit with 2, coverage/truncation problems with 3,
/// and numeric contract violations with 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Operator signatures or dimensions do not match the operation's contract.
    #[error("signature error: {0}")]
    Signature(String),

    /// Invalid configuration value or malformed config file.
    #[error("config error: {0}")]
    Config(String),

    /// The phase-space grid does not cover the environmental state: the
    /// discretized normalization misses unity by `deficit`.
    #[error("grid coverage error: normalization deficit {deficit:.3e}")]
    Coverage { deficit: f64 },

    /// The Fock-space truncation cannot faithfully hold the requested state.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A numeric precondition or postcondition was violated (non-Hermitian
    /// input, negative rate, overflow, ...).
    #[error("numeric contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code associated with this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Coverage { .. } | Error::Truncation(_) => 3,
            Error::Signature(_) | Error::Contract(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(
            serde_json::from_str::<i32>("oops")
                .map_err(Error::from)
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(Error::Coverage { deficit: 0.1 }.exit_code(), 3);
        assert_eq!(Error::Truncation("x".into()).exit_code(), 3);
        assert_eq!(Error::Signature("x".into()).exit_code(), 4);
        assert_eq!(Error::Contract("x".into()).exit_code(), 4);
    }
}
