use thiserror::Error;

/// Crate-wide error type. Variants map one-to-one onto the failure classes
/// surfaced by the CLI as distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input sequence is empty")]
    EmptyInput,

    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("symbol {symbol} out of range for alphabet of size {alpha}")]
    SymbolOutOfRange { symbol: u16, alpha: u16 },

    #[error("alphabet size {0} unsupported (need 2..=256)")]
    BadAlphabet(u32),

    #[error("key tape exhausted: needed {needed} bits, {available} available")]
    KeyExhausted { needed: u64, available: u64 },

    #[error("rate too low: {needed} payload bits do not fit in {capacity} ciphertext bits")]
    RateOverflow { needed: u64, capacity: u64 },

    #[error("malformed stream: {0}")]
    MalformedStream(String),

    #[error("malformed container: {0}")]
    MalformedContainer(String),

    #[error("enumeration guard exceeded: {work} combinations, limit {limit}")]
    GuardExceeded { work: u128, limit: u128 },

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("block with zero probability mass encountered: {0}")]
    ZeroMassBlock(String),

    #[error("invalid machine description at line {line}: {msg}")]
    InvalidSpec { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
