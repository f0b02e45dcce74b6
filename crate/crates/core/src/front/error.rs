use thiserror::Error;

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontErrorKind {
    Syntax,
    UnknownIdentifier,
    Pragma,
    NonAffine,
    Indirect,
    UndeclaredArray,
    RankMismatch,
    NonSquare,
    RepetitionDependentBound,
    Duplicate,
    Parametric,
}

impl FrontErrorKind {
    /// Stable machine-greppable code.
    pub fn code(self) -> &'static str {
        match self {
            FrontErrorKind::Syntax => "E_SYNTAX",
            FrontErrorKind::UnknownIdentifier => "E_UNKNOWN_IDENT",
            FrontErrorKind::Pragma => "E_PRAGMA",
            FrontErrorKind::NonAffine => "E_NONAFFINE",
            FrontErrorKind::Indirect => "E_INDIRECT",
            FrontErrorKind::UndeclaredArray => "E_UNDECLARED_ARRAY",
            FrontErrorKind::RankMismatch => "E_RANK",
            FrontErrorKind::NonSquare => "E_NONSQUARE",
            FrontErrorKind::RepetitionDependentBound => "E_REPDEP_BOUND",
            FrontErrorKind::Duplicate => "E_DUPLICATE",
            FrontErrorKind::Parametric => "E_PARAMETRIC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {}: {message}", kind.code())]
pub struct FrontError {
    pub kind: FrontErrorKind,
    pub span: Span,
    pub message: String,
}

impl FrontError {
    pub fn new(kind: FrontErrorKind, span: Span, message: impl Into<String>) -> Self {
        FrontError {
            kind,
            span,
            message: message.into(),
        }
    }
}
