use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
///
/// Every variant maps to a short, stable code (see [`Error::code`]) that the
/// command line prints as `error: <code>: <detail>`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Parameter(String),

    #[error("cannot decode image {}: {detail}", path.display())]
    Decode { path: PathBuf, detail: String },

    #[error("unsupported image format in {}: {detail}", path.display())]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("degenerate segment [{start}, {end}): zero variance")]
    Degenerate { start: usize, end: usize },

    #[error("innovation variance not positive at t={t} (F={f})")]
    Conditioning { t: usize, f: f64 },

    #[error("invalid synthetic spec: {0}")]
    Spec(String),

    #[error("{}:{line}: {detail}", path.display())]
    Csv {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("epoch pattern does not match {}", path.display())]
    EpochPattern { path: PathBuf },

    #[error("duplicate epoch {epoch} ({} and {})", first.display(), second.display())]
    DuplicateEpoch {
        epoch: i64,
        first: PathBuf,
        second: PathBuf,
    },

    #[error("no images match {0}")]
    NoMatches(String),

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Diagnostic(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Machine-greppable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Decode { .. } => "decode",
            Error::UnsupportedFormat { .. } => "unsupported-format",
            Error::Degenerate { .. } => "degenerate",
            Error::Conditioning { .. } => "conditioning",
            Error::Spec(_) => "spec",
            Error::Csv { .. } => "csv",
            Error::EpochPattern { .. } => "epoch-pattern",
            Error::DuplicateEpoch { .. } => "duplicate-epoch",
            Error::NoMatches(_) => "no-matches",
            Error::Config(_) => "config",
            Error::Diagnostic(_) => "diagnostic",
            Error::Context { source, .. } => source.code(),
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
