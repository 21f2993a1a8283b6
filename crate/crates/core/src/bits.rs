use crate::error::{Error, Result};

/// An immutable-length-agnostic bit string, packed MSB-first.
///
/// Bit `i` lives at `bytes[i / 8]`, mask `0x80 >> (i % 8)`. Unused trailing
/// bits of the final byte are kept at zero so derived equality and hashing
/// are well defined. The empty string (the null word) is a legal value and
/// is distinct from `"0"`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        BitString::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        BitString {
            bytes: vec![0; len.div_ceil(8)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {} out of range {}", i, self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len);
        let mask = 0x80 >> (i % 8);
        if bit {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    /// Appends `width` bits of `value`, most significant of the `width` first.
    pub fn push_uint(&mut self, value: u64, width: u32) {
        assert!(width <= 64);
        assert!(
            width == 64 || value < (1u64 << width),
            "value {} does not fit in {} bits",
            value,
            width
        );
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    pub fn append(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut b = BitString::new();
        for bit in bits {
            b.push(bit);
        }
        b
    }

    pub fn from_uint(value: u64, width: u32) -> Self {
        let mut b = BitString::with_capacity(width as usize);
        b.push_uint(value, width);
        b
    }

    /// Whole bytes, MSB-first; length is `8 * bytes.len()`.
    pub fn from_raw_bytes(bytes: Vec<u8>) -> Self {
        let len = bytes.len() * 8;
        BitString { bytes, len }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Interprets the whole string as a big-endian unsigned integer.
    /// Requires `len <= 64`.
    pub fn to_uint(&self) -> u64 {
        assert!(self.len <= 64);
        let mut v = 0u64;
        for i in 0..self.len {
            v = (v << 1) | self.get(i) as u64;
        }
        v
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len);
        let mut out = BitString::with_capacity(len);
        for i in 0..len {
            out.push(self.get(start + i));
        }
        out
    }

    /// Bitwise XOR of equal-length strings.
    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::LengthMismatch(self.len, other.len));
        }
        let mut bytes: Vec<u8> = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        if let Some(last) = bytes.last_mut() {
            let used = self.len % 8;
            if used != 0 {
                *last &= 0xffu8 << (8 - used);
            }
        }
        Ok(BitString { bytes, len: self.len })
    }

    /// Wire form: 8-byte little-endian bit count, then the packed bytes,
    /// final byte zero-padded.
    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.bytes.len());
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        out.extend_from_slice(&self.bytes);
        out
    }

    pub fn from_wire(data: &[u8]) -> Result<(BitString, usize)> {
        if data.len() < 8 {
            return Err(Error::MalformedContainer(
                "bit string header truncated".into(),
            ));
        }
        let len = u64::from_le_bytes(data[..8].try_into().unwrap()) as usize;
        let nbytes = len.div_ceil(8);
        if data.len() < 8 + nbytes {
            return Err(Error::MalformedContainer(format!(
                "bit string payload truncated: want {} bytes, have {}",
                nbytes,
                data.len() - 8
            )));
        }
        let mut bytes = data[8..8 + nbytes].to_vec();
        if let Some(last) = bytes.last_mut() {
            let used = len % 8;
            if used != 0 && *last & !(0xffu8 << (8 - used)) != 0 {
                return Err(Error::MalformedContainer(
                    "nonzero padding bits in final byte".into(),
                ));
            }
        }
        Ok((BitString { bytes, len }, 8 + nbytes))
    }
}

impl std::fmt::Display for BitString {
    /// `"0101"` digits; the null word prints as `"-"`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return write!(f, "-");
        }
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    /// Parses `"0101"`; `"-"` denotes the null word.
    fn from_str(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(BitString::new());
        }
        let mut b = BitString::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => b.push(false),
                '1' => b.push(true),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "invalid bit character {:?}",
                        ch
                    )))
                }
            }
        }
        Ok(b)
    }
}

/// Cursor for reading fixed-width fields out of a [`BitString`].
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitString) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_uint(&mut self, width: u32) -> Result<u64> {
        if (width as usize) > self.remaining() {
            return Err(Error::MalformedStream(format!(
                "truncated: need {} bits, {} left",
                width,
                self.remaining()
            )));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.bits.get(self.pos) as u64;
            self.pos += 1;
        }
        Ok(v)
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read_uint(1)? == 1)
    }
}
