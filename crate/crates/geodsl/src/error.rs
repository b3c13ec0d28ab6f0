use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {pos}: expected {expected}")]
    Syntax { pos: Pos, expected: String },
    #[error("unknown symbol `{symbol}` at {pos}")]
    UnknownSymbol { pos: Pos, symbol: String },
    #[error("dimension mismatch at {pos}: expected {expected}, found {found}")]
    DimensionMismatch { pos: Pos, expected: usize, found: usize },
    /// A well-formed statement that contradicts another one.
    #[error("invalid config at {pos}: {message}")]
    Invalid { pos: Pos, message: String },
    #[error("evaluation error: {0}")]
    Evaluation(String),
}

/// Coarse classification: problems found before any numerical evaluation
/// versus problems found while evaluating expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Evaluation,
}

impl DslError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            DslError::Evaluation(_) => ErrorKind::Evaluation,
            _ => ErrorKind::Syntax,
        }
    }

    pub fn pos(&self) -> Option<Pos> {
        match self {
            DslError::Syntax { pos, .. }
            | DslError::UnknownSymbol { pos, .. }
            | DslError::DimensionMismatch { pos, .. }
            | DslError::Invalid { pos, .. } => Some(*pos),
            DslError::Evaluation(_) => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, DslError>;
