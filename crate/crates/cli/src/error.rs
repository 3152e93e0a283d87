use serde::Serialize;

pub type CliResult<T> = Result<T, CliError>;

/// A failure reported as one JSON line on standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliError {
    pub stage: String,
    pub kind: String,
    pub code: u8,
    pub message: String,
}

impl CliError {
    /// Exit code 1: bad input, configuration or validation failure.
    pub fn input(stage: &str, kind: &str, message: impl Into<String>) -> Self {
        CliError { stage: stage.into(), kind: kind.into(), code: 1, message: message.into() }
    }

    pub fn core(stage: &str, e: &bimonetary_core::Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(['(', ' ', '{']).next().unwrap_or("Error").to_owned();
        CliError {
            stage: stage.into(),
            kind,
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }

    pub fn io(stage: &str, e: &std::io::Error) -> Self {
        CliError::input(stage, "Io", e.to_string())
    }

    pub fn to_line(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} failed ({}): {}", self.stage, self.kind, self.message)
    }
}

/// Attaches a stage name to core results.
pub trait AtStage<T> {
    fn at(self, stage: &str) -> CliResult<T>;
}

impl<T> AtStage<T> for bimonetary_core::Result<T> {
    fn at(self, stage: &str) -> CliResult<T> {
        self.map_err(|e| CliError::core(stage, &e))
    }
}

impl<T> AtStage<T> for std::io::Result<T> {
    fn at(self, stage: &str) -> CliResult<T> {
        self.map_err(|e| CliError::io(stage, &e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bimonetary_core::Error;

    #[test]
    fn codes_follow_error_class() {
        let e = CliError::core("var", &Error::RankDeficient);
        assert_eq!((e.code, e.kind.as_str()), (2, "RankDeficient"));
        let e = CliError::core("load", &Error::MissingColumn("E".into()));
        assert_eq!((e.code, e.kind.as_str()), (1, "MissingColumn"));
        assert!(e.message.contains('E'));
    }

    #[test]
    fn error_line_is_single_line_json() {
        let line = CliError::input("validate", "DuplicateDate", "duplicate date: 2018-01-02").to_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"]["code"], 1);
        assert_eq!(v["error"]["stage"], "validate");
    }
}
