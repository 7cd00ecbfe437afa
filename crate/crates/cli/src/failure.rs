use serde::Serialize;

use prony_bath::{Error, ErrorCategory};

/// Failure classes and their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureKind {
    /// Configuration, schema, usage or file errors.
    Config,
    Numerical,
    Unsupported,
    /// A selftest check failed.
    Violation,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Violation => 1,
            FailureKind::Config => 2,
            FailureKind::Numerical => 3,
            FailureKind::Unsupported => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: FailureKind,
    exit_code: i32,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorDocument<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn new(kind: FailureKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(FailureKind::Config, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// `{"error": {"kind", "exit_code", "message"}}` on one line.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorDocument {
            error: ErrorBody {
                kind: self.kind,
                exit_code: self.exit_code(),
                message: &self.message,
            },
        })
        .expect("error document serializes")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e.category() {
            ErrorCategory::Input => FailureKind::Config,
            ErrorCategory::Numerical => FailureKind::Numerical,
            ErrorCategory::Unsupported => FailureKind::Unsupported,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("i/o: {e}"))
    }
}
