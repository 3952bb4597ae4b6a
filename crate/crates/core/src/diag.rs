//! Diagnostics shared by the markup reader, the validator and the version
//! auditor.

use std::fmt;

use serde::Serialize;

use crate::model::Location;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Machine-readable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    MissingTitle,
    NoSection,
    NoRelation,
    Syntax,
    UnsupportedSyntax,
    UnknownDirective,
    UnterminatedBlock,
    StrayText,
    BadId,
    DupId,
    MissingCpr,
    DanglingCpr,
    EmptyRelation,
    EmptyPacket,
    HeadMismatch,
    SectionNumber,
    DanglingDef,
    ArityMismatch,
    IndicatorMismatch,
    UnlinkedGoal,
    DupVersion,
    BadVersion,
    StaleBinding,
    BindingDiverged,
    ChainBroken,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::MissingTitle => "MISSING_TITLE",
            Code::NoSection => "NO_SECTION",
            Code::NoRelation => "NO_RELATION",
            Code::Syntax => "SYNTAX",
            Code::UnsupportedSyntax => "UNSUPPORTED_SYNTAX",
            Code::UnknownDirective => "UNKNOWN_DIRECTIVE",
            Code::UnterminatedBlock => "UNTERMINATED_BLOCK",
            Code::StrayText => "STRAY_TEXT",
            Code::BadId => "BAD_ID",
            Code::DupId => "DUP_ID",
            Code::MissingCpr => "MISSING_CPR",
            Code::DanglingCpr => "DANGLING_CPR",
            Code::EmptyRelation => "EMPTY_RELATION",
            Code::EmptyPacket => "EMPTY_PACKET",
            Code::HeadMismatch => "HEAD_MISMATCH",
            Code::SectionNumber => "SECTION_NUMBER",
            Code::DanglingDef => "DANGLING_DEF",
            Code::ArityMismatch => "ARITY_MISMATCH",
            Code::IndicatorMismatch => "INDICATOR_MISMATCH",
            Code::UnlinkedGoal => "UNLINKED_GOAL",
            Code::DupVersion => "DUP_VERSION",
            Code::BadVersion => "BAD_VERSION",
            Code::StaleBinding => "STALE_BINDING",
            Code::BindingDiverged => "BINDING_DIVERGED",
            Code::ChainBroken => "CHAIN_BROKEN",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::EmptyPacket
            | Code::HeadMismatch
            | Code::ArityMismatch
            | Code::IndicatorMismatch
            | Code::UnlinkedGoal
            | Code::StaleBinding
            | Code::BindingDiverged
            | Code::ChainBroken => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    /// Document coordinate, when the diagnostic concerns a known element.
    pub location: Option<Location>,
    /// Id of the most specific element involved.
    pub element: Option<String>,
    /// Byte offset inside the element's text (packet code, paragraph).
    pub offset: Option<usize>,
    /// Source position, filled in when the document came from a file.
    pub position: Option<Position>,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            message: message.into(),
            location: None,
            element: None,
            offset: None,
            position: None,
        }
    }

    pub fn at(mut self, line: usize, column: usize) -> Self {
        self.position = Some(Position { line, column });
        self
    }

    pub fn located(mut self, location: Option<Location>) -> Self {
        self.location = location;
        self
    }

    pub fn element(mut self, id: impl Into<String>) -> Self {
        self.element = Some(id.into());
        self
    }

    pub fn offset(mut self, offset: usize) -> Self {
        self.offset = Some(offset);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.position {
            write!(f, "{}:{}: ", p.line, p.column)?;
        } else if let Some(loc) = &self.location {
            write!(f, "{loc}: ")?;
        }
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// True when any diagnostic is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
