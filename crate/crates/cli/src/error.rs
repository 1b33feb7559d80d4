use serde_json::json;

/// Exit code for bad input of any kind.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for numerical failures (not a frame, singular slice, ...).
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.to_string(),
            message: message.into(),
            code: EXIT_VALIDATION,
        }
    }

    pub fn to_json(&self) -> String {
        let v = json!({
            "error": {
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.code,
            }
        });
        serde_json::to_string_pretty(&v).expect("plain json")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<gaborlab::Error> for CliError {
    fn from(e: gaborlab::Error) -> Self {
        CliError {
            kind: e.kind().to_string(),
            message: e.to_string(),
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
