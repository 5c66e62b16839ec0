use thiserror::Error;

/// Errors raised by machine construction, evaluation and conversion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("mode error: {0}")]
    Mode(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("oracle scale exceeded: {0}")]
    OracleScale(String),

    #[error("search bound exceeded: {0}")]
    SearchBound(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("unsupported grammar: {0}")]
    UnsupportedGrammar(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Schema or invariant violation in an interchange document, located by JSON pointer.
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
