//! Converse-side computations: empirical block entropy, the redundancy
//! term `delta` that separates any finite-state encrypter's key rate from
//! the parse complexity of its input, the resulting lower bound on that
//! key rate, a block Shannon-code compressor, and the classic parse-count
//! lower bound on finite-state compressor output lengths.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Sequence};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::fsm::catalog::BufferStates;
use crate::fsm::{EncrypterSpec, State, Word, MAX_WORD_BITS};
use crate::lz78::{lz_complexity, max_phrase_count, parse};

/// All converse quantities for one `(x, s, m)` evaluation.
///
/// `sigma_lower` bounds from below the per-symbol key consumption of every
/// perfectly secure, information-lossless machine with at most `s` states
/// run on `x`. At desk-top lengths `delta` usually exceeds the parse
/// complexity and the clamped bound is zero; the term breakdown is the
/// interesting part there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub chosen_m: usize,
    pub s: u64,
    pub alpha: u16,
    /// Empirical entropy of non-overlapping `chosen_m`-blocks, per symbol.
    pub block_entropy_rate: f64,
    pub lz_complexity: f64,
    pub delta: f64,
    /// The five summands of `delta`, in fixed order: state count,
    /// alphabet-and-state counting, phrase-count, dictionary, rounding.
    pub term_breakdown: [f64; 5],
    /// `max(lz_complexity - delta, 0)`.
    pub sigma_lower: f64,
}

impl BoundsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<BoundsReport> {
        serde_json::from_str(s)
            .map_err(|e| Error::MalformedContainer(format!("bounds report: {}", e)))
    }

    /// Header for the versioned CSV sweep format; `csv_row` emits matching
    /// rows.
    pub const CSV_HEADER: &'static str = "version,x_id,n,s,alpha,chosen_m,\
block_entropy_rate,lz_complexity,delta,delta_states,delta_counting,\
delta_phrases,delta_dictionary,delta_rounding,sigma_lower";

    pub fn csv_row(&self, x_id: &str) -> String {
        let t = &self.term_breakdown;
        format!(
            "1,{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            x_id,
            self.n,
            self.s,
            self.alpha,
            self.chosen_m,
            self.block_entropy_rate,
            self.lz_complexity,
            self.delta,
            t[0],
            t[1],
            t[2],
            t[3],
            t[4],
            self.sigma_lower,
        )
    }
}

/// Shannon entropy of the empirical distribution of non-overlapping
/// `m`-blocks of `x`, divided by `m` (bits per symbol). A trailing partial
/// block is dropped.
pub fn block_entropy_rate(x: &Sequence, m: usize) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if m == 0 || m > x.len() {
        return Err(Error::InvalidParameter(format!(
            "block length {} out of range 1..={}",
            m,
            x.len()
        )));
    }
    let blocks = x.len() / m;
    let mut counts: HashMap<&[u8], u64> = HashMap::new();
    for b in 0..blocks {
        *counts.entry(&x.symbols()[b * m..(b + 1) * m]).or_default() += 1;
    }
    let total = blocks as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(h / m as f64)
}

/// The five-term redundancy `delta(s, n, m)` and its breakdown:
///
/// ```text
/// 2 log2(s) / m
/// + (alpha s - 1) log2(m + 1) / m
/// + 2 m (1 + log2 alpha) max_phrase_count(n, alpha) / n
/// + 2 m alpha^(2m) (1 + log2 alpha) / n
/// + 1 / m
/// ```
///
/// The phrase-count term uses the exact worst case over length-`n` inputs,
/// which keeps the bound computable instead of asymptotic.
pub fn delta_bound(s: u64, n: usize, m: usize, alphabet: Alphabet) -> Result<(f64, [f64; 5])> {
    if s < 1 {
        return Err(Error::InvalidParameter("state count must be positive".into()));
    }
    if m < 1 || n < m {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m <= n, got m = {}, n = {}",
            m, n
        )));
    }
    let mf = m as f64;
    let nf = n as f64;
    let alpha = alphabet.size() as f64;
    let la1 = 1.0 + alpha.log2();
    let pow = alpha.powi(2 * m as i32);
    let t4 = 2.0 * mf * pow * la1 / nf;
    if !pow.is_finite() || !t4.is_finite() {
        return Err(Error::NumericOverflow(format!(
            "alpha^(2m) with alpha = {}, m = {}",
            alphabet.size(),
            m
        )));
    }
    let t1 = 2.0 * (s as f64).log2() / mf;
    let t2 = (alpha * s as f64 - 1.0) * (mf + 1.0).log2() / mf;
    let t3 = 2.0 * mf * la1 * max_phrase_count(n as u64, alphabet.size()) as f64 / nf;
    let t5 = 1.0 / mf;
    Ok((t1 + t2 + t3 + t4 + t5, [t1, t2, t3, t4, t5]))
}

/// Upper end of the block-length grid searched by [`delta_min`]:
/// `ceil(4 sqrt(log2 n))`, clamped to `1..=n`.
pub fn grid_limit(n: usize) -> usize {
    let hi = (4.0 * (n as f64).log2().sqrt()).ceil() as usize;
    hi.clamp(1, n)
}

/// Minimizes [`delta_bound`] over the block-length grid; ties go to the
/// smaller `m`. Grid points whose dictionary term overflows are skipped
/// (they cannot be minimal).
pub fn delta_min(s: u64, n: usize, alphabet: Alphabet) -> Result<(usize, f64, [f64; 5])> {
    let mut best: Option<(usize, f64, [f64; 5])> = None;
    for m in 1..=grid_limit(n) {
        let (d, terms) = match delta_bound(s, n, m, alphabet) {
            Ok(v) => v,
            Err(Error::NumericOverflow(_)) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|b| d < b.1) {
            best = Some((m, d, terms));
        }
    }
    best.ok_or_else(|| Error::NumericOverflow("every grid point overflows".into()))
}

/// Full converse report for `x` against machines with at most `s` states,
/// using the grid-minimizing block length.
pub fn sigma_lower_bound(x: &Sequence, s: u64) -> Result<BoundsReport> {
    if x.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 symbols".into()));
    }
    let (m, delta, terms) = delta_min(s, x.len(), x.alphabet())?;
    let rho = lz_complexity(x)?;
    Ok(BoundsReport {
        n: x.len(),
        chosen_m: m,
        s,
        alpha: x.alphabet().size(),
        block_entropy_rate: block_entropy_rate(x, m)?,
        lz_complexity: rho,
        delta,
        term_breakdown: terms,
        sigma_lower: (rho - delta).max(0.0),
    })
}

/// Per-symbol key-rate floor implied by the `m`-block entropy for a
/// perfectly secure, information-lossless machine with `s` states:
/// `h - 2 log2(s)/m - (alpha s - 1) log2(m+1)/m` where `h` is bits per
/// symbol.
pub fn key_rate_floor(block_entropy_rate: f64, s: u64, m: usize, alphabet: Alphabet) -> f64 {
    let mf = m as f64;
    block_entropy_rate
        - 2.0 * (s as f64).log2() / mf
        - (alphabet.size() as f64 * s as f64 - 1.0) * (mf + 1.0).log2() / mf
}

/// Both sides of the counting chain linking block entropy to the parse
/// complexity at block length `m`:
///
/// ```text
/// n h + n/m  >=  c log2 c - 2 m c (1 + log2 alpha)
///                - 2 m alpha^(2m) (1 + log2 alpha)
/// ```
///
/// with `h` the per-symbol block entropy of `x` and `c` its phrase count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck {
    pub lhs_bits: f64,
    pub rhs_bits: f64,
    pub holds: bool,
}

pub fn block_chain_check(x: &Sequence, m: usize) -> Result<ChainCheck> {
    let n = x.len() as f64;
    let h = block_entropy_rate(x, m)?;
    let lhs = n * h + n / m as f64;
    let c = parse(x).count() as f64;
    let alpha = x.alphabet().size() as f64;
    let la1 = 1.0 + alpha.log2();
    let pow = alpha.powi(2 * m as i32);
    if !pow.is_finite() {
        return Err(Error::NumericOverflow("alpha^(2m)".into()));
    }
    let c_log = if c >= 1.0 { c * c.log2() } else { 0.0 };
    let rhs = c_log - 2.0 * m as f64 * c * la1 - 2.0 * m as f64 * pow * la1;
    Ok(ChainCheck { lhs_bits: lhs, rhs_bits: rhs, holds: lhs >= rhs })
}

/// A probability assignment over length-`m` blocks; masses are strictly
/// positive and sum to at most one (sub-probability assignments are
/// allowed). Blocks without an entry have mass zero.
#[derive(Debug, Clone)]
pub struct BlockDistribution {
    alphabet: Alphabet,
    m: usize,
    mass: HashMap<Vec<u8>, f64>,
}

impl BlockDistribution {
    pub fn new(
        alphabet: Alphabet,
        m: usize,
        entries: impl IntoIterator<Item = (Vec<u8>, f64)>,
    ) -> Result<BlockDistribution> {
        if m == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        let mut mass = HashMap::new();
        let mut total = 0.0f64;
        for (block, p) in entries {
            if block.len() != m {
                return Err(Error::InvalidParameter(format!(
                    "block of length {} in a {}-block distribution",
                    block.len(),
                    m
                )));
            }
            for &sym in &block {
                alphabet.check(sym)?;
            }
            if !p.is_finite() || p <= 0.0 || p > 1.0 {
                return Err(Error::InvalidParameter(format!("bad block mass {}", p)));
            }
            total += p;
            if mass.insert(block, p).is_some() {
                return Err(Error::InvalidParameter("duplicate block".into()));
            }
        }
        if mass.is_empty() {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!("masses sum to {}", total)));
        }
        Ok(BlockDistribution { alphabet, m, mass })
    }

    /// Uniform over all `alpha^m` blocks.
    pub fn uniform(alphabet: Alphabet, m: usize) -> Result<BlockDistribution> {
        let count = alphabet
            .sequence_count(m)
            .filter(|&c| c <= 1 << 20)
            .ok_or_else(|| Error::NumericOverflow("block space".into()))?;
        let p = 1.0 / count as f64;
        let entries = (0..count)
            .map(|i| Ok((Sequence::from_index(alphabet, m, i)?.to_bytes(), p)))
            .collect::<Result<Vec<_>>>()?;
        BlockDistribution::new(alphabet, m, entries)
    }

    /// Empirical distribution of the non-overlapping `m`-blocks of `x`;
    /// the trailing partial block is dropped.
    pub fn empirical(x: &Sequence, m: usize) -> Result<BlockDistribution> {
        if m == 0 || m > x.len() {
            return Err(Error::InvalidParameter(format!(
                "block length {} out of range 1..={}",
                m,
                x.len()
            )));
        }
        let blocks = x.len() / m;
        let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
        for b in 0..blocks {
            *counts.entry(x.symbols()[b * m..(b + 1) * m].to_vec()).or_default() += 1;
        }
        let entries =
            counts.into_iter().map(|(blk, c)| (blk, c as f64 / blocks as f64)).collect::<Vec<_>>();
        BlockDistribution::new(x.alphabet(), m, entries)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_len(&self) -> usize {
        self.m
    }

    pub fn mass(&self, block: &[u8]) -> Option<f64> {
        self.mass.get(block).copied()
    }

    /// Whether every block of the space has positive mass.
    pub fn full_support(&self) -> bool {
        self.alphabet.sequence_count(self.m).is_some_and(|c| c == self.mass.len() as u64)
    }
}

/// Finite-state compressor that buffers `m` symbols and emits the
/// Shannon-code word for each completed block: `ceil(-log2 Q(block))` bits,
/// prefix-free by the Kraft inequality. Between block ends it emits
/// nothing; a trailing partial block stays in the state.
#[derive(Debug, Clone)]
pub struct BlockShannonFsm {
    alphabet: Alphabet,
    m: usize,
    codebook: HashMap<Vec<u8>, BitString>,
    state_count: u64,
}

/// Builds the compressor for `q`. Blocks with zero mass get no codeword
/// and fail at encode time. Masses below `2^-63` are rejected: their
/// codewords would not fit a machine word.
pub fn build_block_shannon_fsm(q: &BlockDistribution) -> Result<BlockShannonFsm> {
    let m = q.block_len();
    let alpha = q.alphabet().size() as u64;
    // q_m = (alpha^m - 1) / (alpha - 1): one state per buffered proper
    // prefix of a block.
    let state_count = {
        let mut total = 0u64;
        let mut pow = 1u64;
        for _ in 0..m {
            total = total
                .checked_add(pow)
                .ok_or_else(|| Error::NumericOverflow("state count".into()))?;
            pow = match pow.checked_mul(alpha) {
                Some(p) => p,
                None if total > 0 => break,
                None => return Err(Error::NumericOverflow("state count".into())),
            };
        }
        total
    };

    let mut lengths: Vec<(Vec<u8>, u32)> = q
        .mass
        .iter()
        .map(|(block, &p)| {
            let l = (-p.log2()).ceil().max(0.0);
            if l > MAX_WORD_BITS as f64 {
                return Err(Error::InvalidParameter(format!(
                    "block mass {} needs a {}-bit codeword; cap is {}",
                    p, l, MAX_WORD_BITS
                )));
            }
            Ok((block.clone(), l as u32))
        })
        .collect::<Result<Vec<_>>>()?;
    lengths.sort();
    lengths.sort_by_key(|e| e.1);

    // Canonical prefix-code assignment; Kraft holds because each
    // 2^-length <= mass and the masses sum to at most one.
    let mut codebook = HashMap::new();
    let mut code = 0u64;
    let mut prev_len = 0u32;
    for (block, len) in lengths {
        code <<= len - prev_len;
        debug_assert!(len == 0 || code < 1u64 << len, "Kraft violation");
        codebook.insert(block, BitString::from_uint(code, len));
        code += 1;
        prev_len = len;
    }

    Ok(BlockShannonFsm { alphabet: q.alphabet(), m, codebook, state_count })
}

impl BlockShannonFsm {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_len(&self) -> usize {
        self.m
    }

    /// `(alpha^m - 1) / (alpha - 1)`.
    pub fn state_count(&self) -> u64 {
        self.state_count
    }

    pub fn codeword(&self, block: &[u8]) -> Option<&BitString> {
        self.codebook.get(block)
    }

    pub fn encode(&self, x: &Sequence) -> Result<BitString> {
        if x.alphabet() != self.alphabet {
            return Err(Error::InvalidParameter("alphabet mismatch".into()));
        }
        let mut out = BitString::new();
        for block in x.symbols().chunks_exact(self.m) {
            let word = self.codebook.get(block).ok_or_else(|| {
                Error::ZeroMassBlock(format!("{:?}", block))
            })?;
            out.append(word);
        }
        Ok(out)
    }

    pub fn encoded_len(&self, x: &Sequence) -> Result<u64> {
        Ok(self.encode(x)?.len() as u64)
    }

    /// The same compressor as a key-less encrypter machine, for the
    /// exhaustive invertibility checker. Requires full support, since a
    /// machine's output function is total.
    pub fn to_encrypter_spec(&self) -> Result<EncrypterSpec> {
        let space = self
            .alphabet
            .sequence_count(self.m)
            .ok_or_else(|| Error::NumericOverflow("block space".into()))?;
        if self.codebook.len() as u64 != space {
            return Err(Error::InvalidParameter(
                "machine form needs a codeword for every block".into(),
            ));
        }
        let states = BufferStates::new(self.alphabet, self.m)?;
        debug_assert_eq!(states.count(), self.state_count);
        let a = self.alphabet.size() as usize;
        let count = states.count() as usize;
        let mut next = vec![0 as State; count * a];
        let mut words: HashMap<(State, u8), Word> = HashMap::new();
        for z in 0..count as State {
            let mut buf = states.string(z);
            buf.push(0);
            for x in 0..a as u8 {
                *buf.last_mut().unwrap() = x;
                if buf.len() < self.m {
                    next[z as usize * a + x as usize] = states.id(&buf);
                } else {
                    let bits = &self.codebook[&buf];
                    words.insert((z, x), Word::new(bits.len() as u8, bits.to_uint()));
                }
            }
        }
        EncrypterSpec::from_func(
            self.alphabet,
            count as u32,
            0,
            next,
            vec![0; count * a],
            move |z, x, _| words.get(&(z, x)).copied().unwrap_or(Word::NULL),
        )
    }
}

/// Result of testing a compressor's output length against the parse-count
/// lower bound `(c + q^2) log2(c / (4 q^2))` for a `q`-state
/// information-lossless compressor. The right side is nonpositive
/// (`trivial`) whenever `c <= 4 q^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthBoundCheck {
    pub code_len_bits: u64,
    pub phrase_count: u64,
    pub state_count: u64,
    pub rhs_bits: f64,
    pub holds: bool,
    pub trivial: bool,
    pub slack_bits: f64,
}

pub fn check_compressor_length_bound(
    code_len_bits: u64,
    state_count: u64,
    x: &Sequence,
) -> Result<LengthBoundCheck> {
    if state_count == 0 {
        return Err(Error::InvalidParameter("state count must be positive".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let c = parse(x).count() as u64;
    let cf = c as f64;
    let q2 = (state_count as f64) * (state_count as f64);
    let rhs = (cf + q2) * (cf / (4.0 * q2)).log2();
    Ok(LengthBoundCheck {
        code_len_bits,
        phrase_count: c,
        state_count,
        rhs_bits: rhs,
        holds: code_len_bits as f64 >= rhs,
        trivial: rhs <= 0.0,
        slack_bits: code_len_bits as f64 - rhs,
    })
}
