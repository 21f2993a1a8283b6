use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Finite symbol alphabet `{0, 1, ..., size-1}` with `2 <= size <= 256`.
///
/// Symbols are stored as `u8`, so the wire form of a sequence is simply one
/// byte per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: u16,
}

impl Alphabet {
    pub fn new(size: u16) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(Error::BadAlphabet(size as u32));
        }
        Ok(Alphabet { size })
    }

    pub const BINARY: Alphabet = Alphabet { size: 2 };

    pub fn size(&self) -> u16 {
        self.size
    }

    /// Bits needed to write one symbol with a fixed-width code.
    pub fn symbol_width(&self) -> u32 {
        ceil_log2(self.size as u64)
    }

    pub fn contains(&self, symbol: u8) -> bool {
        (symbol as u16) < self.size
    }

    pub fn check(&self, symbol: u8) -> Result<()> {
        if self.contains(symbol) {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol: symbol as u16,
                alpha: self.size,
            })
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> {
        (0..self.size).map(|s| s as u8)
    }

    /// Number of length-`n` sequences, when it fits in a u64.
    pub fn sequence_count(&self, n: usize) -> Option<u64> {
        u32::try_from(n).ok().and_then(|n| (self.size as u64).checked_pow(n))
    }
}

/// `ceil(log2(v))` for `v >= 1`; the width needed to index `v` values.
pub fn ceil_log2(v: u64) -> u32 {
    debug_assert!(v >= 1);
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// A finite sequence of symbols over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    alphabet: Alphabet,
    data: Vec<u8>,
}

impl Sequence {
    pub fn new(alphabet: Alphabet, data: Vec<u8>) -> Result<Self> {
        for &s in &data {
            alphabet.check(s)?;
        }
        Ok(Sequence { alphabet, data })
    }

    pub fn binary(bits: &[u8]) -> Result<Self> {
        Sequence::new(Alphabet::BINARY, bits.to_vec())
    }

    /// The `index`-th length-`n` sequence in lexicographic order.
    pub fn from_index(alphabet: Alphabet, n: usize, index: u64) -> Result<Self> {
        let count = alphabet
            .sequence_count(n)
            .ok_or_else(|| Error::NumericOverflow("sequence space size".into()))?;
        if index >= count {
            return Err(Error::InvalidParameter(format!(
                "sequence index {} out of {}",
                index, count
            )));
        }
        let alpha = alphabet.size() as u64;
        let mut data = vec![0u8; n];
        let mut v = index;
        for slot in data.iter_mut().rev() {
            *slot = (v % alpha) as u8;
            v /= alpha;
        }
        Ok(Sequence { alphabet, data })
    }

    /// Parses "0"/"1"/... digit characters, e.g. `"010001"`.
    pub fn binary_str(s: &str) -> Result<Self> {
        let data = s
            .bytes()
            .map(|b| {
                if b.is_ascii_digit() {
                    Ok(b - b'0')
                } else {
                    Err(Error::InvalidParameter(format!(
                        "non-digit character {:?} in sequence literal",
                        b as char
                    )))
                }
            })
            .collect::<Result<Vec<u8>>>()?;
        Sequence::new(Alphabet::BINARY, data)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.data
    }

    /// Wire form: one symbol per byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.clone()
    }

    pub fn from_bytes(alphabet: Alphabet, bytes: &[u8]) -> Result<Self> {
        Sequence::new(alphabet, bytes.to_vec())
    }
}

impl std::fmt::Display for Sequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.alphabet.size() <= 10 {
            for &s in &self.data {
                write!(f, "{}", s)?;
            }
        } else {
            for (i, &s) in self.data.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", s)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(256), 8);
        assert_eq!(ceil_log2(257), 9);
    }

    #[test]
    fn alphabet_bounds() {
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(257).is_err());
        assert_eq!(Alphabet::new(2).unwrap().symbol_width(), 1);
        assert_eq!(Alphabet::new(3).unwrap().symbol_width(), 2);
        assert_eq!(Alphabet::new(256).unwrap().symbol_width(), 8);
    }

    #[test]
    fn sequence_validates_symbols() {
        let a3 = Alphabet::new(3).unwrap();
        assert!(Sequence::new(a3, vec![0, 1, 2]).is_ok());
        assert!(matches!(
            Sequence::new(a3, vec![0, 3]),
            Err(Error::SymbolOutOfRange { symbol: 3, alpha: 3 })
        ));
    }

    #[test]
    fn binary_str_round_trip() {
        let x = Sequence::binary_str("010001").unwrap();
        assert_eq!(x.symbols(), &[0, 1, 0, 0, 0, 1]);
        assert_eq!(x.to_string(), "010001");
    }
}
