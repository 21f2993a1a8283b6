//! Finite-state encrypter model: a machine consumes plain-text symbols and
//! key bits, emits variable-length binary cryptogram words, and evolves its
//! state on the plain-text alone.
//!
//! A machine is a sixtuple (input alphabet, output words, states, output
//! function, next-state function, key demand). Per step it reads symbol `x`
//! in state `z`, draws `demand(z, x)` fresh bits from the key tape, emits
//! `output(z, x, k)`, and moves to `next_state(z, x)`. Key demands and
//! output words are capped at 63 bits so the exhaustive verifiers in
//! [`verify`] can count key tapes and compare distributions exactly in
//! integer arithmetic.

pub mod catalog;
pub mod text;
pub mod verify;

pub use verify::{
    check_information_lossless, check_perfect_secrecy, secrecy_sweep, window_distribution,
    IlVerdict, IlWitness, SecrecyVerdict, SecrecyWitness,
};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::alphabet::{Alphabet, Sequence};
use crate::bits::BitString;
use crate::error::{Error, Result};

/// Machine state index, `0..state_count`.
pub type State = u32;

/// Maximum key demand and output word length, in bits.
pub const MAX_WORD_BITS: u8 = 63;

/// A binary word of explicit length; the null word has length zero. Words
/// compare by (length, bits), so the null word differs from "0".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    bits: u64,
}

impl Word {
    pub const NULL: Word = Word { len: 0, bits: 0 };

    /// `bits` holds the word MSB-first in its low `len` bits.
    pub fn new(len: u8, bits: u64) -> Word {
        assert!(len <= MAX_WORD_BITS, "word length {} exceeds cap", len);
        assert!(len == 63 || bits < 1u64 << len, "bits do not fit length");
        Word { len, bits }
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn xor(&self, other: Word) -> Word {
        assert_eq!(self.len, other.len, "xor of unequal word lengths");
        Word { len: self.len, bits: self.bits ^ other.bits }
    }

    pub fn to_bitstring(&self) -> BitString {
        BitString::from_uint(self.bits, self.len as u32)
    }

    pub fn from_bitstring(b: &BitString) -> Result<Word> {
        if b.len() > MAX_WORD_BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "word of {} bits exceeds the {}-bit cap",
                b.len(),
                MAX_WORD_BITS
            )));
        }
        Ok(Word { len: b.len() as u8, bits: b.to_uint() })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return write!(f, "-");
        }
        for i in (0..self.len).rev() {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

enum Output {
    /// Explicit (state, symbol, key word) table; text-format machines.
    Table(HashMap<(State, u8, Word), Word>),
    /// Computed output; parametric built-ins.
    Func(Arc<dyn Fn(State, u8, Word) -> Word + Send + Sync>),
}

/// The encrypter sixtuple with a fixed initial state.
///
/// Debug output summarizes the machine; the output function is opaque.
pub struct EncrypterSpec {
    alphabet: Alphabet,
    state_count: u32,
    initial_state: State,
    next: Vec<State>,
    demand: Vec<u8>,
    output: Output,
}

impl fmt::Debug for EncrypterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EncrypterSpec")
            .field("alphabet", &self.alphabet.size())
            .field("state_count", &self.state_count)
            .field("initial_state", &self.initial_state)
            .field("next", &self.next)
            .field("demand", &self.demand)
            .field(
                "output",
                &match self.output {
                    Output::Table(_) => "table",
                    Output::Func(_) => "computed",
                },
            )
            .finish()
    }
}

impl EncrypterSpec {
    /// Builds a machine with a computed output function. `next` and
    /// `demand` are row-major `[state][symbol]` tables.
    pub fn from_func<F>(
        alphabet: Alphabet,
        state_count: u32,
        initial_state: State,
        next: Vec<State>,
        demand: Vec<u8>,
        output: F,
    ) -> Result<EncrypterSpec>
    where
        F: Fn(State, u8, Word) -> Word + Send + Sync + 'static,
    {
        let spec = EncrypterSpec {
            alphabet,
            state_count,
            initial_state,
            next,
            demand,
            output: Output::Func(Arc::new(output)),
        };
        spec.validate_tables()?;
        Ok(spec)
    }

    /// Builds a table-backed machine and validates output totality: one
    /// entry per (state, symbol, key word) with the demanded word length.
    pub fn from_table(
        alphabet: Alphabet,
        state_count: u32,
        initial_state: State,
        next: Vec<State>,
        demand: Vec<u8>,
        table: HashMap<(State, u8, Word), Word>,
    ) -> Result<EncrypterSpec> {
        let spec = EncrypterSpec {
            alphabet,
            state_count,
            initial_state,
            next,
            demand,
            output: Output::Table(table),
        };
        spec.validate_tables()?;
        let Output::Table(table) = &spec.output else { unreachable!() };
        let mut needed = 0u64;
        for z in 0..spec.state_count {
            for x in 0..spec.alphabet.size() as u8 {
                let d = spec.key_demand(z, x);
                needed = needed.saturating_add(1u64 << d);
            }
        }
        if needed > 1 << 16 {
            return Err(Error::InvalidParameter(format!(
                "output table needs {} entries; cap is 65536",
                needed
            )));
        }
        let mut count = 0u64;
        for z in 0..spec.state_count {
            for x in 0..spec.alphabet.size() as u8 {
                let d = spec.key_demand(z, x);
                for k in 0u64..1 << d {
                    if !table.contains_key(&(z, x, Word::new(d, k))) {
                        return Err(Error::InvalidParameter(format!(
                            "output table missing entry for state {} symbol {} key {}",
                            z,
                            x,
                            Word::new(d, k)
                        )));
                    }
                    count += 1;
                }
            }
        }
        if count as usize != table.len() {
            return Err(Error::InvalidParameter(format!(
                "output table has {} extra entries",
                table.len() as u64 - count
            )));
        }
        Ok(spec)
    }

    fn validate_tables(&self) -> Result<()> {
        let a = self.alphabet.size() as usize;
        let want = self.state_count as usize * a;
        if self.state_count == 0 {
            return Err(Error::InvalidParameter("state count must be positive".into()));
        }
        if self.next.len() != want || self.demand.len() != want {
            return Err(Error::InvalidParameter(format!(
                "transition tables must have {} entries",
                want
            )));
        }
        if self.initial_state >= self.state_count {
            return Err(Error::InvalidParameter(format!(
                "initial state {} out of range",
                self.initial_state
            )));
        }
        if self.next.iter().any(|&z| z >= self.state_count) {
            return Err(Error::InvalidParameter("next-state entry out of range".into()));
        }
        if self.demand.iter().any(|&d| d > MAX_WORD_BITS) {
            return Err(Error::InvalidParameter(format!(
                "key demand exceeds the {}-bit cap",
                MAX_WORD_BITS
            )));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn state_count(&self) -> u32 {
        self.state_count
    }

    pub fn initial_state(&self) -> State {
        self.initial_state
    }

    pub fn next_state(&self, z: State, x: u8) -> State {
        self.next[z as usize * self.alphabet.size() as usize + x as usize]
    }

    pub fn key_demand(&self, z: State, x: u8) -> u8 {
        self.demand[z as usize * self.alphabet.size() as usize + x as usize]
    }

    pub fn output(&self, z: State, x: u8, k: Word) -> Word {
        debug_assert_eq!(k.len(), self.key_demand(z, x));
        match &self.output {
            Output::Table(t) => t[&(z, x, k)],
            Output::Func(f) => f(z, x, k),
        }
    }

    /// States `z_1..z_{n+1}` visited on `x`; key-independent.
    pub fn state_path(&self, x: &Sequence) -> Result<Vec<State>> {
        let mut path = Vec::with_capacity(x.len() + 1);
        let mut z = self.initial_state;
        path.push(z);
        for &xi in x.symbols() {
            self.check_symbol(xi)?;
            z = self.next_state(z, xi);
            path.push(z);
        }
        Ok(path)
    }

    fn check_symbol(&self, x: u8) -> Result<()> {
        self.alphabet.check(x)
    }

    /// Rebuilds the machine with an explicit output table; fails when the
    /// total demand is too large to tabulate.
    pub fn tabulate(&self) -> Result<EncrypterSpec> {
        let mut table = HashMap::new();
        for z in 0..self.state_count {
            for x in 0..self.alphabet.size() as u8 {
                let d = self.key_demand(z, x);
                if d > 16 {
                    return Err(Error::InvalidParameter(format!(
                        "key demand {} too large to tabulate",
                        d
                    )));
                }
                for k in 0u64..1 << d {
                    let kw = Word::new(d, k);
                    table.insert((z, x, kw), self.output(z, x, kw));
                }
            }
        }
        EncrypterSpec::from_table(
            self.alphabet,
            self.state_count,
            self.initial_state,
            self.next.clone(),
            self.demand.clone(),
            table,
        )
    }
}

enum TapeSource {
    Fixed(BitString),
    Seeded { rng: ChaCha12Rng, buf: u64, avail: u8 },
}

/// A stream of uniform key bits with a consumed-bit cursor. Fixed tapes are
/// finite and error on exhaustion; seeded tapes are unbounded and
/// reproducible from the seed.
pub struct KeyTape {
    src: TapeSource,
    cursor: u64,
}

impl KeyTape {
    pub fn fixed(bits: BitString) -> KeyTape {
        KeyTape { src: TapeSource::Fixed(bits), cursor: 0 }
    }

    /// Whole bytes, MSB-first.
    pub fn from_bytes(bytes: &[u8]) -> KeyTape {
        KeyTape::fixed(BitString::from_raw_bytes(bytes.to_vec()))
    }

    pub fn seeded(seed: u64) -> KeyTape {
        KeyTape {
            src: TapeSource::Seeded { rng: ChaCha12Rng::seed_from_u64(seed), buf: 0, avail: 0 },
            cursor: 0,
        }
    }

    /// Total bits consumed so far.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Bits left on a fixed tape; `None` when unbounded.
    pub fn remaining(&self) -> Option<u64> {
        match &self.src {
            TapeSource::Fixed(b) => Some(b.len() as u64 - self.cursor),
            TapeSource::Seeded { .. } => None,
        }
    }

    fn next_bit(&mut self) -> Result<bool> {
        let bit = match &mut self.src {
            TapeSource::Fixed(b) => {
                if self.cursor >= b.len() as u64 {
                    return Err(Error::KeyExhausted {
                        needed: self.cursor + 1,
                        available: b.len() as u64,
                    });
                }
                b.get(self.cursor as usize)
            }
            TapeSource::Seeded { rng, buf, avail } => {
                if *avail == 0 {
                    *buf = rng.next_u64();
                    *avail = 64;
                }
                *avail -= 1;
                (*buf >> *avail) & 1 == 1
            }
        };
        self.cursor += 1;
        Ok(bit)
    }

    pub fn read_word(&mut self, len: u8) -> Result<Word> {
        if let TapeSource::Fixed(b) = &self.src {
            if self.cursor + len as u64 > b.len() as u64 {
                return Err(Error::KeyExhausted {
                    needed: self.cursor + len as u64,
                    available: b.len() as u64,
                });
            }
        }
        let mut bits = 0u64;
        for _ in 0..len {
            bits = bits << 1 | self.next_bit()? as u64;
        }
        Ok(Word::new(len, bits))
    }

    pub fn read_bits(&mut self, len: u64) -> Result<BitString> {
        if let TapeSource::Fixed(b) = &self.src {
            if self.cursor + len > b.len() as u64 {
                return Err(Error::KeyExhausted {
                    needed: self.cursor + len,
                    available: b.len() as u64,
                });
            }
        }
        let mut out = BitString::with_capacity(len as usize);
        for _ in 0..len {
            out.push(self.next_bit()?);
        }
        Ok(out)
    }
}

/// Full record of one encryption run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptionTrace {
    /// Cryptogram words `y_1..y_n`.
    pub outputs: Vec<Word>,
    /// States `z_1..z_{n+1}`.
    pub states: Vec<State>,
    /// Key words `k_1..k_n`.
    pub key_words: Vec<Word>,
    /// Total key bits consumed.
    pub consumed: u64,
}

impl EncryptionTrace {
    /// Concatenation of the output words.
    pub fn cryptogram_bits(&self) -> BitString {
        let mut out = BitString::new();
        for w in &self.outputs {
            out.append(&w.to_bitstring());
        }
        out
    }
}

/// Runs the machine on `x`, drawing key words from `tape`.
pub fn run(spec: &EncrypterSpec, x: &Sequence, tape: &mut KeyTape) -> Result<EncryptionTrace> {
    if x.alphabet().size() != spec.alphabet.size() {
        return Err(Error::InvalidParameter(format!(
            "input alphabet {} does not match machine alphabet {}",
            x.alphabet().size(),
            spec.alphabet.size()
        )));
    }
    let mut outputs = Vec::with_capacity(x.len());
    let mut key_words = Vec::with_capacity(x.len());
    let mut states = Vec::with_capacity(x.len() + 1);
    let mut consumed = 0u64;
    let mut z = spec.initial_state;
    states.push(z);
    for &xi in x.symbols() {
        spec.check_symbol(xi)?;
        let d = spec.key_demand(z, xi);
        let k = tape.read_word(d)?;
        consumed += d as u64;
        outputs.push(spec.output(z, xi, k));
        key_words.push(k);
        z = spec.next_state(z, xi);
        states.push(z);
    }
    Ok(EncryptionTrace { outputs, states, key_words, consumed })
}

/// Key bits demanded per symbol, `sum demand(z_i, x_i) / n`. Key demands
/// never depend on key bits, so no tape is needed.
pub fn key_rate(spec: &EncrypterSpec, x: &Sequence) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0u64;
    let mut z = spec.initial_state;
    for &xi in x.symbols() {
        spec.check_symbol(xi)?;
        total += spec.key_demand(z, xi) as u64;
        z = spec.next_state(z, xi);
    }
    Ok(total as f64 / x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::catalog;
    use super::*;

    fn bseq(s: &str) -> Sequence {
        Sequence::binary_str(s).unwrap()
    }

    #[test]
    fn word_identity_includes_length() {
        assert_ne!(Word::NULL, Word::new(1, 0));
        assert_ne!(Word::new(1, 0), Word::new(2, 0));
        assert_eq!(Word::NULL.to_string(), "-");
        assert_eq!(Word::new(3, 0b101).to_string(), "101");
        assert_eq!(Word::from_bitstring(&BitString::from_uint(0b101, 3)).unwrap(), Word::new(3, 0b101));
    }

    #[test]
    fn xor_pad_trace() {
        let spec = catalog::xor_pad(Alphabet::BINARY).unwrap();
        let mut tape = KeyTape::fixed(BitString::from_bits([true, false, true]));
        let trace = run(&spec, &bseq("011"), &mut tape).unwrap();
        let want: Vec<Word> =
            [1u64, 1, 0].iter().map(|&b| Word::new(1, b)).collect();
        assert_eq!(trace.outputs, want);
        assert_eq!(trace.consumed, 3);
        assert_eq!(trace.states, vec![0, 0, 0, 0]);
        assert_eq!(key_rate(&spec, &bseq("011")).unwrap(), 1.0);
    }

    #[test]
    fn idle_machine_emits_nothing() {
        let spec = catalog::idle(Alphabet::BINARY).unwrap();
        let mut tape = KeyTape::fixed(BitString::new());
        let trace = run(&spec, &bseq("0110"), &mut tape).unwrap();
        assert!(trace.outputs.iter().all(|w| *w == Word::NULL));
        assert_eq!(trace.consumed, 0);
        assert_eq!(key_rate(&spec, &bseq("0110")).unwrap(), 0.0);
    }

    #[test]
    fn state_path_is_key_independent() {
        let spec = catalog::otp_lz_block(Alphabet::BINARY, 2).unwrap();
        let x = bseq("011000");
        let t1 = run(&spec, &x, &mut KeyTape::seeded(1)).unwrap();
        let t2 = run(&spec, &x, &mut KeyTape::seeded(99)).unwrap();
        assert_eq!(t1.states, t2.states);
        assert_eq!(t1.states, spec.state_path(&x).unwrap());
        assert_eq!(t1.consumed, t2.consumed);
        let rate = key_rate(&spec, &x).unwrap();
        assert_eq!(t1.consumed as f64, rate * x.len() as f64);
    }

    #[test]
    fn block_pad_rate_matches_block_code_lengths() {
        // One block spanning the whole input: demand equals the full
        // compressed length.
        let spec = catalog::otp_lz_block(Alphabet::BINARY, 6).unwrap();
        let x = bseq("000000");
        let enc = crate::lz78::lz78_encode(&x).unwrap();
        assert_eq!(key_rate(&spec, &x).unwrap(), enc.len() as f64 / 6.0);
        // Shorter blocks pay per-block token overhead.
        let spec2 = catalog::otp_lz_block(Alphabet::BINARY, 2).unwrap();
        let block = crate::lz78::lz78_encode(&bseq("00")).unwrap();
        assert_eq!(key_rate(&spec2, &x).unwrap(), 3.0 * block.len() as f64 / 6.0);
    }

    #[test]
    fn seeded_tape_is_reproducible() {
        let mut a = KeyTape::seeded(7);
        let mut b = KeyTape::seeded(7);
        assert_eq!(a.read_bits(130).unwrap(), b.read_bits(130).unwrap());
        assert_eq!(a.cursor(), 130);
    }

    #[test]
    fn fixed_tape_exhaustion() {
        let mut tape = KeyTape::from_bytes(&[0xff]);
        assert_eq!(tape.read_word(5).unwrap(), Word::new(5, 0b11111));
        let err = tape.read_bits(4).unwrap_err();
        assert!(matches!(err, Error::KeyExhausted { needed: 9, available: 8 }));
        // A failed read must not advance the cursor.
        assert_eq!(tape.cursor(), 5);
        assert_eq!(tape.read_word(3).unwrap(), Word::new(3, 0b111));
    }

    #[test]
    fn tape_bytes_are_msb_first() {
        let mut tape = KeyTape::from_bytes(&[0b1010_0000]);
        assert!(tape.next_bit().unwrap());
        assert!(!tape.next_bit().unwrap());
        assert!(tape.next_bit().unwrap());
    }

    #[test]
    fn rejects_malformed_machines() {
        let a = Alphabet::BINARY;
        assert!(EncrypterSpec::from_func(a, 1, 1, vec![0, 0], vec![0, 0], |_, _, _| Word::NULL)
            .is_err());
        assert!(EncrypterSpec::from_func(a, 1, 0, vec![0], vec![0, 0], |_, _, _| Word::NULL)
            .is_err());
        assert!(EncrypterSpec::from_func(a, 1, 0, vec![0, 3], vec![0, 0], |_, _, _| Word::NULL)
            .is_err());
        assert!(EncrypterSpec::from_func(a, 1, 0, vec![0, 0], vec![64, 0], |_, _, _| Word::NULL)
            .is_err());
    }

    #[test]
    fn alphabet_mismatch_rejected() {
        let spec = catalog::xor_pad(Alphabet::BINARY).unwrap();
        let a3 = Alphabet::new(3).unwrap();
        let x = Sequence::new(a3, vec![0, 1]).unwrap();
        assert!(run(&spec, &x, &mut KeyTape::seeded(0)).is_err());
    }

    #[test]
    fn tabulate_preserves_behavior() {
        let spec = catalog::xor_pad(Alphabet::BINARY).unwrap();
        let table = spec.tabulate().unwrap();
        let x = bseq("0110");
        let t1 = run(&spec, &x, &mut KeyTape::seeded(5)).unwrap();
        let t2 = run(&table, &x, &mut KeyTape::seeded(5)).unwrap();
        assert_eq!(t1, t2);
    }
}
