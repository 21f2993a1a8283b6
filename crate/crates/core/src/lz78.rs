//! Incremental parsing and the associated token codec.
//!
//! A sequence is split left to right into phrases, each the shortest string
//! not yet in the phrase dictionary. The final phrase may be incomplete
//! (equal to an earlier phrase) when the input ends mid-lookup; it still
//! counts toward the phrase count `c`. The normalized parse complexity is
//! `c * log2(c) / n` bits per symbol, with `1 * log2(1) = 0`.

use std::collections::HashMap;

use crate::alphabet::{ceil_log2, Alphabet, Sequence};
use crate::bits::{BitReader, BitString};
use crate::error::{Error, Result};

/// Outcome of incremental parsing.
#[derive(Debug, Clone)]
pub struct ParseResult {
    /// Phrases in parse order; the last may duplicate an earlier one when
    /// incomplete.
    pub phrases: Vec<Vec<u8>>,
    /// Whether the final phrase ended by becoming a new dictionary entry.
    pub last_complete: bool,
    /// `c * log2(c) / n`; zero for the empty sequence.
    pub complexity: f64,
}

impl ParseResult {
    /// Phrase count `c`, the incomplete final phrase included.
    pub fn count(&self) -> usize {
        self.phrases.len()
    }
}

/// One codec token: a dictionary index plus, for complete phrases, the new
/// literal symbol. `parent` 0 is the empty phrase; earlier phrases are
/// numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Token {
    parent: u32,
    literal: Option<u8>,
}

struct Tokenized {
    tokens: Vec<Token>,
    phrases: Vec<Vec<u8>>,
    last_complete: bool,
}

/// Trie-driven single pass; phrase `t` is stored at node id `t`.
fn tokenize(x: &Sequence) -> Tokenized {
    let mut children: HashMap<(u32, u8), u32> = HashMap::new();
    let mut tokens = Vec::new();
    let mut phrases: Vec<Vec<u8>> = Vec::new();
    let mut last_complete = true;

    let syms = x.symbols();
    let mut node = 0u32;
    let mut start = 0usize;
    let mut i = 0usize;
    while i < syms.len() {
        match children.get(&(node, syms[i])) {
            Some(&next) => {
                node = next;
                i += 1;
            }
            None => {
                let id = phrases.len() as u32 + 1;
                children.insert((node, syms[i]), id);
                tokens.push(Token { parent: node, literal: Some(syms[i]) });
                phrases.push(syms[start..=i].to_vec());
                i += 1;
                start = i;
                node = 0;
            }
        }
    }
    if node != 0 {
        // Input ended while still matching: incomplete final phrase.
        tokens.push(Token { parent: node, literal: None });
        phrases.push(syms[start..].to_vec());
        last_complete = false;
    }

    Tokenized { tokens, phrases, last_complete }
}

/// Splits `x` into its incremental parse.
pub fn parse(x: &Sequence) -> ParseResult {
    let t = tokenize(x);
    let c = t.phrases.len();
    ParseResult {
        phrases: t.phrases,
        last_complete: t.last_complete,
        complexity: normalized_complexity(c, x.len()),
    }
}

fn normalized_complexity(c: usize, n: usize) -> f64 {
    if n == 0 || c <= 1 {
        0.0
    } else {
        c as f64 * (c as f64).log2() / n as f64
    }
}

/// `c(x) * log2(c(x)) / n`. Errors on the empty sequence.
pub fn lz_complexity(x: &Sequence) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(parse(x).complexity)
}

/// Index field width for the `t`-th token (1-based): `ceil(log2(t + 1))`.
fn index_width(t: usize) -> u32 {
    ceil_log2(t as u64 + 1)
}

/// Encodes `x` as a token stream: per token an index into the dictionary
/// built so far, then the literal symbol for complete phrases. The decoder
/// separates the two cases from the target length alone, so the incomplete
/// final phrase carries no literal.
pub fn lz78_encode(x: &Sequence) -> Result<BitString> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sym_width = x.alphabet().symbol_width();
    let t = tokenize(x);
    let mut out = BitString::new();
    for (i, tok) in t.tokens.iter().enumerate() {
        out.push_uint(tok.parent as u64, index_width(i + 1));
        if let Some(sym) = tok.literal {
            out.push_uint(sym as u64, sym_width);
        }
    }
    Ok(out)
}

/// Inverse of [`lz78_encode`]; `n` is the symbol count to reconstruct.
pub fn lz78_decode(bits: &BitString, alphabet: Alphabet, n: usize) -> Result<Sequence> {
    let sym_width = alphabet.symbol_width();
    let mut reader = BitReader::new(bits);
    let mut phrases: Vec<Vec<u8>> = Vec::new();
    let mut out: Vec<u8> = Vec::with_capacity(n);

    while out.len() < n {
        let t = phrases.len() + 1;
        let idx = reader.read_uint(index_width(t))? as usize;
        if idx > phrases.len() {
            return Err(Error::MalformedStream(format!(
                "token {} references phrase {} of {}",
                t,
                idx,
                phrases.len()
            )));
        }
        let prefix: &[u8] = if idx == 0 { &[] } else { &phrases[idx - 1] };
        let after_prefix = out.len() + prefix.len();
        if after_prefix == n {
            // Incomplete final phrase: the prefix is the whole phrase.
            if prefix.is_empty() {
                return Err(Error::MalformedStream("empty final phrase".into()));
            }
            out.extend_from_slice(prefix);
            break;
        }
        if after_prefix > n {
            return Err(Error::MalformedStream(format!(
                "phrase overruns target length {}",
                n
            )));
        }
        let sym = reader.read_uint(sym_width)? as u8;
        alphabet
            .check(sym)
            .map_err(|_| Error::MalformedStream(format!("symbol {} out of range", sym)))?;
        let mut phrase = prefix.to_vec();
        phrase.push(sym);
        out.extend_from_slice(&phrase);
        phrases.push(phrase);
    }

    if reader.remaining() > 0 {
        return Err(Error::MalformedStream(format!(
            "{} unconsumed bits after {} symbols",
            reader.remaining(),
            n
        )));
    }
    Sequence::new(alphabet, out)
}

/// Upper bound on the encoded bit length in terms of the phrase count:
/// `(c + 1) * log2(2 * alpha * (c + 1))`.
pub fn encoded_len_bound(c: usize, alpha: u16) -> f64 {
    let c1 = c as f64 + 1.0;
    c1 * (2.0 * alpha as f64 * c1).log2()
}

/// Exact maximum of the phrase count over all sequences of length `n`:
/// greedily exhaust all `alpha` phrases of length 1, all `alpha^2` of
/// length 2, and so on, counting a final possibly-incomplete phrase.
pub fn max_phrase_count(n: u64, alpha: u16) -> u64 {
    let a = alpha as u128;
    let mut total_syms: u128 = 0;
    let mut total_phrases: u128 = 0;
    let mut len: u128 = 1;
    let mut pow = a;
    loop {
        let layer = len * pow;
        if total_syms + layer > n as u128 {
            break;
        }
        total_syms += layer;
        total_phrases += pow;
        len += 1;
        match pow.checked_mul(a) {
            Some(p) if len * p <= u64::MAX as u128 => pow = p,
            _ => break,
        }
    }
    let rest = n as u128 - total_syms;
    total_phrases += rest.div_ceil(len);
    total_phrases as u64
}
