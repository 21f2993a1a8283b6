//! Built-in encrypter machines used by the verifiers, the schemes, and the
//! CLI: the bitwise pad, two degenerate references, and two block machines
//! (compress-then-pad with variable-length words, and its fixed-rate padded
//! variant whose word length never depends on the plain-text).

use crate::alphabet::{ceil_log2, Alphabet, Sequence};
use crate::error::{Error, Result};
use crate::fsm::{EncrypterSpec, State, Word, MAX_WORD_BITS};
use crate::lz78::lz78_encode;

/// One state per buffered prefix of length `< depth`, enumerated by length
/// then value; state 0 is the empty buffer.
pub(crate) struct BufferStates {
    alpha: u64,
    depth: usize,
    offsets: Vec<u64>,
}

impl BufferStates {
    pub(crate) fn new(alphabet: Alphabet, depth: usize) -> Result<BufferStates> {
        let alpha = alphabet.size() as u64;
        let mut offsets = vec![0u64];
        for j in 0..depth {
            let level = alpha
                .checked_pow(j as u32)
                .and_then(|p| offsets[j].checked_add(p))
                .ok_or_else(|| Error::NumericOverflow("buffer state count".into()))?;
            offsets.push(level);
        }
        if offsets[depth] > 1 << 16 {
            return Err(Error::GuardExceeded {
                work: offsets[depth] as u128,
                limit: 1 << 16,
            });
        }
        Ok(BufferStates { alpha, depth, offsets })
    }

    pub(crate) fn count(&self) -> u64 {
        self.offsets[self.depth]
    }

    pub(crate) fn id(&self, buf: &[u8]) -> State {
        let mut v = 0u64;
        for &sym in buf {
            v = v * self.alpha + sym as u64;
        }
        (self.offsets[buf.len()] + v) as State
    }

    pub(crate) fn string(&self, id: State) -> Vec<u8> {
        let id = id as u64;
        let j = (0..self.depth).find(|&j| id < self.offsets[j + 1]).expect("state in range");
        let mut v = id - self.offsets[j];
        let mut out = vec![0u8; j];
        for slot in out.iter_mut().rev() {
            *slot = (v % self.alpha) as u8;
            v /= self.alpha;
        }
        out
    }
}

/// Pads every symbol with fresh key bits: one state, demand =
/// ceil(log2(alpha)), output = symbol XOR key word.
pub fn xor_pad(alphabet: Alphabet) -> Result<EncrypterSpec> {
    let a = alphabet.size() as usize;
    let w = alphabet.symbol_width() as u8;
    EncrypterSpec::from_func(
        alphabet,
        1,
        0,
        vec![0; a],
        vec![w; a],
        move |_, x, k| Word::new(w, x as u64 ^ k.bits()),
    )
}

/// Consumes no key and emits nothing.
pub fn idle(alphabet: Alphabet) -> Result<EncrypterSpec> {
    let a = alphabet.size() as usize;
    EncrypterSpec::from_func(alphabet, 1, 0, vec![0; a], vec![0; a], |_, _, _| Word::NULL)
}

/// Emits the plain symbol in clear; the canonical secrecy failure.
pub fn identity(alphabet: Alphabet) -> Result<EncrypterSpec> {
    let a = alphabet.size() as usize;
    let w = alphabet.symbol_width() as u8;
    EncrypterSpec::from_func(alphabet, 1, 0, vec![0; a], vec![0; a], move |_, x, _| {
        Word::new(w, x as u64)
    })
}

fn block_tables(
    states: &BufferStates,
    alphabet: Alphabet,
    block: usize,
    mut on_block: impl FnMut(&[u8]) -> Result<(u8, u64)>,
) -> Result<(Vec<State>, Vec<u8>, Vec<(u8, u64)>)> {
    let a = alphabet.size() as usize;
    let count = states.count() as usize;
    let mut next = vec![0 as State; count * a];
    let mut demand = vec![0u8; count * a];
    let mut words = vec![(0u8, 0u64); count * a];
    for z in 0..count as State {
        let buf = states.string(z);
        for x in 0..a as u8 {
            let idx = z as usize * a + x as usize;
            if buf.len() + 1 < block {
                let mut longer = buf.clone();
                longer.push(x);
                next[idx] = states.id(&longer);
            } else {
                let mut full = buf.clone();
                full.push(x);
                let (d, w) = on_block(&full)?;
                demand[idx] = d;
                words[idx] = (d, w);
                next[idx] = 0;
            }
        }
    }
    Ok((next, demand, words))
}

/// Buffers `block` symbols, then emits that block's compressed form XORed
/// with fresh key bits. Word lengths vary with the block content, so the
/// strict secrecy check rejects this machine (length leakage) even though
/// every emitted bit is pad-masked.
pub fn otp_lz_block(alphabet: Alphabet, block: usize) -> Result<EncrypterSpec> {
    if block == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    let states = BufferStates::new(alphabet, block)?;
    let (next, demand, words) = block_tables(&states, alphabet, block, |full| {
        let seq = Sequence::new(alphabet, full.to_vec())?;
        let enc = lz78_encode(&seq)?;
        if enc.len() > MAX_WORD_BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "compressed block of {} bits exceeds the word cap",
                enc.len()
            )));
        }
        Ok((enc.len() as u8, enc.to_uint()))
    })?;
    let a = alphabet.size() as usize;
    EncrypterSpec::from_func(
        alphabet,
        states.count() as u32,
        0,
        next,
        demand,
        move |z, x, k| {
            let (len, bits) = words[z as usize * a + x as usize];
            Word::new(len, bits ^ k.bits())
        },
    )
}

/// Fixed-rate variant: every block emits exactly `ceil(rate * block)`
/// cipher bits holding (payload length, compressed payload, key fill), all
/// XORed with fresh whitening bits, so the word and its distribution are
/// plain-text independent. Construction fails with RATE_OVERFLOW when some
/// block's payload cannot fit.
pub fn fixed_rate_block(alphabet: Alphabet, block: usize, rate: f64) -> Result<EncrypterSpec> {
    if block == 0 || !rate.is_finite() || rate <= 0.0 {
        return Err(Error::InvalidParameter("need block >= 1 and a positive rate".into()));
    }
    let total = (rate * block as f64).ceil() as u64;
    if total > MAX_WORD_BITS as u64 {
        return Err(Error::InvalidParameter(format!(
            "{} cipher bits per block exceeds the word cap",
            total
        )));
    }
    let width = ceil_log2(total + 1) as u64;
    let states = BufferStates::new(alphabet, block)?;
    let (next, demand, words) = block_tables(&states, alphabet, block, |full| {
        let seq = Sequence::new(alphabet, full.to_vec())?;
        let enc = lz78_encode(&seq)?;
        let payload = enc.len() as u64;
        if width + payload > total {
            return Err(Error::RateOverflow { needed: width + payload, capacity: total });
        }
        let fill = total - width - payload;
        if total + fill > MAX_WORD_BITS as u64 {
            return Err(Error::InvalidParameter(format!(
                "{} key bits per block exceeds the word cap",
                total + fill
            )));
        }
        // Plain word [payload length | payload | zeros]; the zeros are
        // replaced by key fill inside the output function.
        let base = (payload << (total - width) | enc.to_uint() << fill) as u64;
        Ok(((total + fill) as u8, base))
    })?;
    let a = alphabet.size() as usize;
    let cipher_len = total as u8;
    EncrypterSpec::from_func(
        alphabet,
        states.count() as u32,
        0,
        next,
        demand.clone(),
        move |z, x, k| {
            let (d, base) = words[z as usize * a + x as usize];
            if d == 0 {
                return Word::NULL;
            }
            let fill_len = d as u64 - total;
            let whitening = k.bits() >> fill_len;
            let fill = k.bits() & ((1u64 << fill_len) - 1);
            Word::new(cipher_len, base ^ whitening ^ fill)
        },
    )
}

/// Resolves a built-in machine by name: `xor-pad`, `idle`, `identity`,
/// `otp-lz-block:<m>`, or `fixed-rate:<n>:<rate>`.
pub fn builtin(name: &str, alphabet: Alphabet) -> Result<EncrypterSpec> {
    let parts: Vec<&str> = name.split(':').collect();
    let bad = |msg: String| Error::InvalidParameter(msg);
    match parts[0] {
        "xor-pad" if parts.len() == 1 => xor_pad(alphabet),
        "idle" if parts.len() == 1 => idle(alphabet),
        "identity" if parts.len() == 1 => identity(alphabet),
        "otp-lz-block" if parts.len() == 2 => {
            let m: usize = parts[1]
                .parse()
                .map_err(|_| bad(format!("bad block length {:?}", parts[1])))?;
            otp_lz_block(alphabet, m)
        }
        "fixed-rate" if parts.len() == 3 => {
            let n: usize =
                parts[1].parse().map_err(|_| bad(format!("bad block length {:?}", parts[1])))?;
            let r: f64 =
                parts[2].parse().map_err(|_| bad(format!("bad rate {:?}", parts[2])))?;
            fixed_rate_block(alphabet, n, r)
        }
        _ => Err(bad(format!(
            "unknown machine {:?}; expected xor-pad, idle, identity, otp-lz-block:<m>, or fixed-rate:<n>:<rate>",
            name
        ))),
    }
}

/// Names accepted by [`builtin`] that take no parameters, for listings.
pub const BUILTIN_NAMES: [&str; 5] =
    ["xor-pad", "idle", "identity", "otp-lz-block:<m>", "fixed-rate:<n>:<rate>"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::fsm::{key_rate, run, KeyTape};

    fn bseq(s: &str) -> Sequence {
        Sequence::binary_str(s).unwrap()
    }

    #[test]
    fn buffer_state_enumeration_round_trips() {
        let a3 = Alphabet::new(3).unwrap();
        let states = BufferStates::new(a3, 3).unwrap();
        assert_eq!(states.count(), 1 + 3 + 9);
        for id in 0..states.count() as State {
            assert_eq!(states.id(&states.string(id)), id);
        }
        assert_eq!(states.id(&[]), 0);
        assert_eq!(states.string(4), vec![0, 0]);
    }

    #[test]
    fn block_machine_emits_pad_masked_compressed_blocks() {
        let spec = otp_lz_block(Alphabet::BINARY, 2).unwrap();
        assert_eq!(spec.state_count(), 3);
        let x = bseq("0001");
        // Zero tape: outputs equal the compressed blocks verbatim.
        let mut tape = KeyTape::fixed(BitString::zeros(64));
        let trace = run(&spec, &x, &mut tape).unwrap();
        let b1 = lz78_encode(&bseq("00")).unwrap();
        let b2 = lz78_encode(&bseq("01")).unwrap();
        assert_eq!(trace.outputs[0], Word::NULL);
        assert_eq!(trace.outputs[1].to_bitstring(), b1);
        assert_eq!(trace.outputs[2], Word::NULL);
        assert_eq!(trace.outputs[3].to_bitstring(), b2);
        assert_eq!(trace.consumed, (b1.len() + b2.len()) as u64);
    }

    #[test]
    fn fixed_rate_words_have_constant_length() {
        let spec = fixed_rate_block(Alphabet::BINARY, 6, 3.0).unwrap();
        for v in 0u64..64 {
            let x = Sequence::from_index(Alphabet::BINARY, 6, v).unwrap();
            let trace = run(&spec, &x, &mut KeyTape::seeded(v)).unwrap();
            assert!(trace.outputs[..5].iter().all(|w| *w == Word::NULL));
            assert_eq!(trace.outputs[5].len(), 18);
        }
    }

    #[test]
    fn fixed_rate_zero_tape_exposes_header_and_payload() {
        let spec = fixed_rate_block(Alphabet::BINARY, 6, 3.0).unwrap();
        let x = bseq("000000");
        let mut tape = KeyTape::fixed(BitString::zeros(64));
        let trace = run(&spec, &x, &mut tape).unwrap();
        let enc = lz78_encode(&x).unwrap();
        let y = trace.outputs[5].to_bitstring();
        // 18 total, 5-bit length header.
        assert_eq!(y.slice(0, 5).to_uint(), enc.len() as u64);
        assert_eq!(y.slice(5, enc.len()), enc);
        assert!(y.slice(5 + enc.len(), 18 - 5 - enc.len()).iter().all(|b| !b));
        assert_eq!(trace.consumed, 18 + (18 - 5 - enc.len() as u64));
    }

    #[test]
    fn fixed_rate_overflow_at_construction() {
        let err = fixed_rate_block(Alphabet::BINARY, 8, 1.0).unwrap_err();
        assert!(matches!(err, Error::RateOverflow { .. }));
    }

    #[test]
    fn pad_rate_is_symbol_width() {
        let a5 = Alphabet::new(5).unwrap();
        let spec = xor_pad(a5).unwrap();
        let x = Sequence::new(a5, vec![0, 4, 3, 2]).unwrap();
        assert_eq!(key_rate(&spec, &x).unwrap(), 3.0);
    }

    #[test]
    fn builtin_names_resolve() {
        assert!(builtin("xor-pad", Alphabet::BINARY).is_ok());
        assert!(builtin("otp-lz-block:2", Alphabet::BINARY).is_ok());
        assert!(builtin("fixed-rate:6:3.0", Alphabet::BINARY).is_ok());
        assert!(builtin("nope", Alphabet::BINARY).is_err());
        assert!(builtin("otp-lz-block:x", Alphabet::BINARY).is_err());
    }
}
