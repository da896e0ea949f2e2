use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{what}: malformed JSON at line {line}, column {column}: {msg}")]
    Json {
        what: String,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("{what}: {msg}")]
    Schema { what: String, msg: String },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] recurlab::Error),

    #[error("output: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for anything the caller got wrong, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use recurlab::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json { .. } | CliError::Schema { .. } | CliError::Read { .. } => 2,
            CliError::Core(E::Parameter(_) | E::Range { .. } | E::Parse(_)) => 2,
            CliError::Core(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }

    fn json(what: &str, e: serde_json::Error) -> Self {
        if e.line() == 0 {
            return CliError::Schema {
                what: what.into(),
                msg: e.to_string(),
            };
        }
        // serde_json appends its own " at line L column C"; drop it.
        let msg = e.to_string();
        let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m).to_string();
        CliError::Json {
            what: what.into(),
            line: e.line(),
            column: e.column(),
            msg,
        }
    }
}

/// The text of a JSON argument: inline, or read from the file after `@`.
pub fn read_arg(raw: &str) -> Result<String, CliError> {
    match raw.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.into(),
            source,
        }),
        None => Ok(raw.to_string()),
    }
}

/// Parses a JSON argument, reporting syntax errors with their location.
pub fn load_json(what: &str, raw: &str) -> Result<Value, CliError> {
    let text = read_arg(raw)?;
    serde_json::from_str(&text).map_err(|e| CliError::json(what, e))
}

/// Parses a JSON argument straight into `T`, so type errors also carry a
/// line and column.
pub fn load_typed<T: DeserializeOwned>(what: &str, raw: &str) -> Result<T, CliError> {
    let text = read_arg(raw)?;
    serde_json::from_str(&text).map_err(|e| CliError::json(what, e))
}

/// Both views of a JSON argument: the verbatim value for the config echo and
/// the parsed `T`, with locations on syntax and type errors alike.
pub fn load_checked<T: DeserializeOwned>(what: &str, raw: &str) -> Result<(Value, T), CliError> {
    let text = read_arg(raw)?;
    let value = serde_json::from_str(&text).map_err(|e| CliError::json(what, e))?;
    let parsed = serde_json::from_str(&text).map_err(|e| CliError::json(what, e))?;
    Ok((value, parsed))
}

pub fn typed<T: DeserializeOwned>(what: &str, v: &Value) -> Result<T, CliError> {
    T::deserialize(v).map_err(|e| CliError::json(what, e))
}
