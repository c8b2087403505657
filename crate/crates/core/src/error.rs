use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed self-delimiting prefix: input exhausted after {consumed} bits")]
    MalformedPrefix { consumed: usize },

    #[error("string of length {0} has no 64-bit index")]
    IndexOverflow(usize),

    #[error("step budget must be at least 1")]
    ZeroBudget,

    #[error("unknown codec `{0}`")]
    UnknownCodec(String),

    #[error("codec stream is corrupt: {0}")]
    CorruptCodec(&'static str),

    #[error("insufficient approximation: value {value} is below the first {bits} bits of the restricted halting probability")]
    InsufficientApproximation { value: String, bits: usize },

    #[error("query length {requested} exceeds the approximation's program length bound {max}")]
    QueryTooLong { requested: usize, max: usize },

    #[error("cylinder {0:?} has zero mass")]
    ZeroMass(String),

    #[error("block of length {block} longer than string of length {string}")]
    BlockTooLong { block: usize, string: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate probability {0}")]
    DegenerateProbability(f64),

    #[error("rule violation: index {0} selected twice")]
    RepeatedIndex(usize),

    #[error("index {index} out of range for source of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("rule parse error at byte {at}: {msg}")]
    RuleSyntax { at: usize, msg: String },

    #[error("length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("subset is not transitive in the tournament")]
    NotTransitive,

    #[error("exact search supports at most {max} nodes, got {got}")]
    SizeLimit { max: usize, got: usize },

    #[error("bitstring file: {0}")]
    BadFile(String),

    #[error("config: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::BadFile(e.to_string())
    }
}
