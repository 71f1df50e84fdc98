use kolmo_core::Error as CoreError;
use serde_json::json;
use thiserror::Error;

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("verification failure: {0}")]
    Verification(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(vec![msg.into()])
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::Verification(_) => "verification",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let messages = match self {
            CliError::Config(m) => m.clone(),
            CliError::Solver(m) | CliError::Verification(m) => vec![m.clone()],
        };
        json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "messages": messages } })
    }
}

/// Kernel errors caused by the input data count as config errors; the rest
/// are solver failures.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::OrderingViolation { .. } => {
                CliError::config(format!("ordering requirement psi <= g on the Kolmogorov boundary violated: {e}"))
            }
            CoreError::DimensionMismatch { .. }
            | CoreError::InvalidDomain(_)
            | CoreError::InvalidGrid(_)
            | CoreError::ShapeMismatch(_)
            | CoreError::InvalidCoefficients(_)
            | CoreError::UnverifiedCoefficients { .. }
            | CoreError::InvalidConfig(_)
            | CoreError::InvalidSampling(_)
            | CoreError::OutsideDomain
            | CoreError::NonPositiveDilation(_) => CliError::config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("output: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(CoreError::OrderingViolation { node: 0, excess: 1.0 }).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::NoConvergence { iterations: 3, residual: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 4);
        assert_eq!(CliError::config("bad").to_json()["error"]["exit_code"], 2);
    }
}
