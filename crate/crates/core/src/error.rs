use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),

    #[error("invalid atom label `{0}`")]
    InvalidLabel(String),

    #[error("converse relation is not a total function at `{0}`")]
    ConverseNotFunction(String),

    #[error("atom `{atom}` has {count} candidate {which} atoms, expected exactly one")]
    MalformedDomainRange {
        atom: String,
        which: &'static str,
        count: usize,
    },

    #[error("`{0}` is not an identity atom")]
    NotIdentity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integer overflow while computing {0}")]
    Overflow(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
