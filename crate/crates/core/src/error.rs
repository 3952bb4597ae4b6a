use thiserror::Error;

use crate::diag::Diagnostic;

/// Failure of a library operation.
///
/// Structural problems in a document are reported as [`Diagnostic`]s by
/// `validate`/`check`; this type covers operations that cannot produce a
/// result at all.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("version `{0}` is already named")]
    DupVersion(String),
    #[error("no version named `{0}`")]
    UnknownVersion(String),
    #[error("`{0}` is not a valid version name")]
    BadVersionName(String),
    #[error("relation `{from}` refers to undefined relation `{target}`")]
    DanglingDef { from: String, target: String },
    #[error("packet `{packet}` does not belong to relation `{relation}`")]
    ForeignPacket { relation: String, packet: String },
    #[error("version `{version}` binds `{relation}` to missing packet `{packet}`")]
    StaleBinding {
        version: String,
        relation: String,
        packet: String,
    },
    #[error("invalid pattern: {0}")]
    BadPattern(String),
    #[error("no index entry `{0}`")]
    UnknownEntry(String),
    #[error("cannot resolve export scope: {0}")]
    UnresolvableScope(String),
    #[error("interpreter not found: {0}")]
    InterpreterNotFound(String),
    #[error("invalid interpreter configuration: {0}")]
    InvalidConfig(String),
    #[error("document is not well-formed ({} diagnostics)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Machine-readable code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownElement(_) => "UNKNOWN_ELEMENT",
            Error::UnknownRelation(_) => "UNKNOWN_RELATION",
            Error::DupVersion(_) => "DUP_VERSION",
            Error::UnknownVersion(_) => "UNKNOWN_VERSION",
            Error::BadVersionName(_) => "BAD_VERSION_NAME",
            Error::DanglingDef { .. } => "DANGLING_DEF",
            Error::ForeignPacket { .. } => "FOREIGN_PACKET",
            Error::StaleBinding { .. } => "STALE_BINDING",
            Error::BadPattern(_) => "BAD_PATTERN",
            Error::UnknownEntry(_) => "UNKNOWN_ENTRY",
            Error::UnresolvableScope(_) => "UNRESOLVABLE_SCOPE",
            Error::InterpreterNotFound(_) => "INTERPRETER_NOT_FOUND",
            Error::InvalidConfig(_) => "INVALID_CONFIG",
            Error::Invalid(_) => "INVALID_DOCUMENT",
            Error::Io(_) => "IO",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
