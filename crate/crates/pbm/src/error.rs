use serde::Serialize;
use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{what}: {source}")]
    Expression { what: String, source: ParseError },
    #[error(transparent)]
    Numerical(#[from] pbm_core::Error),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    InvalidCertificate(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    class: &'a str,
    code: u8,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<usize>,
}

impl CliError {
    pub fn class(&self) -> &'static str {
        use pbm_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Expression { .. } => "config",
            CliError::Budget(_) => "budget",
            CliError::InvalidCertificate(_) => "invalid-certificate",
            CliError::Io(_) => "io",
            CliError::Numerical(e) => match e {
                E::BudgetExhausted { .. }
                | E::RefinementExhausted
                | E::TooManySteps { .. }
                | E::StepSizeCollapse { .. }
                | E::TwistRadiiNotFound { .. } => "budget",
                E::Precondition(_)
                | E::Resonant { .. }
                | E::MissingLinearization { .. }
                | E::SandwichViolation { .. }
                | E::SandwichIndexMismatch { .. } => "config",
                _ => "numerical",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.class() {
            "config" => 2,
            "budget" => 3,
            "invalid-certificate" => 4,
            _ => 1,
        }
    }

    /// One line of JSON for stderr.
    pub fn to_json(&self) -> String {
        let offset = match self {
            CliError::Expression { source, .. } => Some(source.offset()),
            _ => None,
        };
        let body = ErrorBody { class: self.class(), code: self.exit_code(), message: self.to_string(), offset };
        serde_json::json!({ "error": body }).to_string()
    }
}
