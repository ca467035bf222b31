use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("syntax error at line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error("{path}: {source}")]
    InFile { path: String, source: Box<CliError> },
    #[error("cannot access {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("unknown system `{0}`: not a readable file or a built-in benchmark")]
    UnknownSystem(String),
    #[error("invalid environment variable {name}: {msg}")]
    Env { name: &'static str, msg: String },
    #[error(transparent)]
    Core(#[from] firsyn::Error),
}

impl CliError {
    pub(crate) fn in_file(self, path: &std::path::Path) -> Self {
        CliError::InFile { path: path.display().to_string(), source: Box::new(self) }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), msg: e.to_string() }
    }
}
