use std::path::Path;

use serde::Serialize;
use thiserror::Error;

/// Failure category. Each maps to a distinct process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// A requested check failed.
    Check,
    /// Unreadable, malformed or inconsistent input, or an unwritable output.
    Input,
    /// The solver stopped before reaching the requested tolerance.
    NotConverged,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Check => 1,
            ErrorKind::Input => 2,
            ErrorKind::NotConverged => 3,
        }
    }
}

/// Error reported to the user as a JSON object on stderr.
#[derive(Debug, Clone, PartialEq, Serialize, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            file: None,
            line: None,
            column: None,
            field: None,
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Input, message)
    }

    pub fn check(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Check, message)
    }

    pub fn in_file(mut self, file: &str) -> Self {
        self.file = Some(file.to_string());
        self
    }

    pub fn at_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::input(format!("{}: {err}", path.display())).in_file(&path.display().to_string())
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// `{"error": {...}}` as a single line of JSON.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<sdot::Error> for CliError {
    fn from(err: sdot::Error) -> Self {
        let kind = match err {
            sdot::Error::NotConverged { .. } | sdot::Error::NotAdmissible { .. } => ErrorKind::NotConverged,
            _ => ErrorKind::Input,
        };
        Self::new(kind, err.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        assert_eq!(ErrorKind::Check.exit_code(), 1);
        assert_eq!(ErrorKind::Input.exit_code(), 2);
        assert_eq!(ErrorKind::NotConverged.exit_code(), 3);
    }

    #[test]
    fn json_omits_missing_location() {
        let e = CliError::input("bad").at_field("masses");
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "input");
        assert_eq!(v["error"]["field"], "masses");
        assert!(v["error"].get("line").is_none());
    }

    #[test]
    fn library_errors_map_to_kinds() {
        let e: CliError = sdot::Error::NotConverged { iterations: 3, gradient_inf_norm: 1.0 }.into();
        assert_eq!(e.kind, ErrorKind::NotConverged);
        let e: CliError = sdot::Error::InvalidInput("x".into()).into();
        assert_eq!(e.kind, ErrorKind::Input);
    }
}
