//! Finite-state encryption toolkit.
//!
//! The crate models encryption of individual (non-probabilistic) sequences by
//! finite-state machines fed from a one-time key-bit tape, together with the
//! compressibility machinery needed to reason about how much key such a
//! machine must consume:
//!
//! * [`lz78`]: incremental parsing, the normalized parse complexity
//!   `c log2(c) / n`, and a bit-exact token codec.
//! * [`condlz`]: joint parsing of a (sequence, side-information) pair and a
//!   conditional codec decodable by a receiver that knows the side sequence.
//! * [`fsm`]: the encrypter sixtuple, trace execution, key-rate accounting,
//!   and exhaustive verifiers for information losslessness and perfect
//!   secrecy (exact dyadic arithmetic, never floats).
//! * [`schemes`]: one-time-pad schemes built on the codecs (variable-length,
//!   fixed-rate padded, conditional, and random binning), plus the cryptogram
//!   container format.
//! * [`bounds`]: empirical block entropy, the key-rate converse bound with
//!   its term breakdown, a block Shannon-code compressor, and length-bound
//!   checks for finite-state compressors.
//! * [`lossy`]: brute-force and heuristic search for the least complex
//!   reproduction sequence within a distortion ball.

pub mod alphabet;
pub mod bits;
pub mod bounds;
pub mod condlz;
pub mod error;
pub mod fsm;
pub mod lossy;
pub mod lz78;
pub mod schemes;

pub use alphabet::{Alphabet, Sequence};
pub use bits::BitString;
pub use error::{Error, Result};
