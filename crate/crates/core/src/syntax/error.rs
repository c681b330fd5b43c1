use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: lexical error: {msg}")]
    Lex { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: syntax error: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: head probabilities sum to {total}, which exceeds 1")]
    HeadMassExceeded { line: usize, col: usize, total: String },
    #[error("{line}:{col}: head probability {value} is not positive")]
    NonPositiveProbability { line: usize, col: usize, value: String },
    #[error("{line}:{col}: undeclared symbol `{name}`")]
    UndeclaredSymbol { line: usize, col: usize, name: String },
    #[error("{line}:{col}: exogenous predicate `{name}` may not appear in a law head")]
    ExogenousInHead { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{name}` used with {used} arguments, declared with {declared}")]
    ArityMismatch { line: usize, col: usize, name: String, used: usize, declared: String },
    #[error("{line}:{col}: `{value}` is not a member of sort `{sort}`")]
    SortMismatch { line: usize, col: usize, value: String, sort: String },
    #[error("{line}:{col}: variable `{name}` is not bound by any quantifier")]
    FreeVariable { line: usize, col: usize, name: String },
    #[error("{line}:{col}: {msg}")]
    Declaration { line: usize, col: usize, msg: String },
}

impl SyntaxError {
    /// Stable machine-readable code, one per rejection class.
    pub fn code(&self) -> &'static str {
        match self {
            SyntaxError::Lex { .. } => "lex",
            SyntaxError::Parse { .. } => "syntax",
            SyntaxError::HeadMassExceeded { .. } => "head-mass-exceeded",
            SyntaxError::NonPositiveProbability { .. } => "non-positive-probability",
            SyntaxError::UndeclaredSymbol { .. } => "undeclared-symbol",
            SyntaxError::ExogenousInHead { .. } => "exogenous-in-head",
            SyntaxError::ArityMismatch { .. } => "arity-mismatch",
            SyntaxError::SortMismatch { .. } => "sort-mismatch",
            SyntaxError::FreeVariable { .. } => "free-variable",
            SyntaxError::Declaration { .. } => "declaration",
        }
    }

    pub fn position(&self) -> (usize, usize) {
        match self {
            SyntaxError::Lex { line, col, .. }
            | SyntaxError::Parse { line, col, .. }
            | SyntaxError::HeadMassExceeded { line, col, .. }
            | SyntaxError::NonPositiveProbability { line, col, .. }
            | SyntaxError::UndeclaredSymbol { line, col, .. }
            | SyntaxError::ExogenousInHead { line, col, .. }
            | SyntaxError::ArityMismatch { line, col, .. }
            | SyntaxError::SortMismatch { line, col, .. }
            | SyntaxError::FreeVariable { line, col, .. }
            | SyntaxError::Declaration { line, col, .. } => (*line, *col),
        }
    }
}
