//! File and key-tape plumbing: symbol framing, the key sidecar, and the
//! byte-granular cursor advance.

use std::fs;
use std::path::{Path, PathBuf};

use fse_core::fsm::KeyTape;
use fse_core::{Alphabet, Error, Result, Sequence};

/// How file bytes map to symbols: `bits` unpacks each byte MSB-first into
/// eight binary symbols, `bytes` treats each byte as one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SymbolMode {
    Bits,
    Bytes,
}

/// Fills in the defaults: a binary alphabet reads bit-wise, anything wider
/// reads byte-wise.
pub fn resolve_framing(mode: Option<SymbolMode>, alpha: Option<u16>) -> Result<(SymbolMode, u16)> {
    let (mode, alpha) = match (mode, alpha) {
        (Some(m), Some(a)) => (m, a),
        (Some(SymbolMode::Bits), None) => (SymbolMode::Bits, 2),
        (Some(SymbolMode::Bytes), None) => (SymbolMode::Bytes, 256),
        (None, Some(2)) => (SymbolMode::Bits, 2),
        (None, Some(a)) => (SymbolMode::Bytes, a),
        (None, None) => (SymbolMode::Bits, 2),
    };
    if mode == SymbolMode::Bits && alpha != 2 {
        return Err(Error::InvalidParameter(format!(
            "bit-wise framing is binary only, not alpha = {}",
            alpha
        )));
    }
    Ok((mode, alpha))
}

pub fn bytes_to_sequence(data: &[u8], mode: SymbolMode, alpha: u16) -> Result<Sequence> {
    match mode {
        SymbolMode::Bits => {
            let mut syms = Vec::with_capacity(data.len() * 8);
            for &b in data {
                for k in (0..8).rev() {
                    syms.push((b >> k) & 1);
                }
            }
            Sequence::new(Alphabet::BINARY, syms)
        }
        SymbolMode::Bytes => Sequence::new(Alphabet::new(alpha.into())?, data.to_vec()),
    }
}

pub fn read_sequence(path: &Path, mode: SymbolMode, alpha: u16) -> Result<Sequence> {
    bytes_to_sequence(&fs::read(path)?, mode, alpha)
}

pub fn sequence_to_bytes(x: &Sequence, mode: SymbolMode) -> Result<Vec<u8>> {
    match mode {
        SymbolMode::Bits => {
            if x.alphabet().size() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "cannot pack alpha = {} symbols bit-wise",
                    x.alphabet().size()
                )));
            }
            if x.len() % 8 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "{} bits are not byte-aligned; write with --symbols bytes",
                    x.len()
                )));
            }
            let mut out = Vec::with_capacity(x.len() / 8);
            for chunk in x.symbols().chunks(8) {
                out.push(chunk.iter().fold(0u8, |acc, &b| acc << 1 | b));
            }
            Ok(out)
        }
        SymbolMode::Bytes => Ok(x.to_bytes()),
    }
}

/// An opened key file with its starting cursor (in bytes).
pub struct KeyState {
    pub path: PathBuf,
    pub start_byte: u64,
}

pub fn sidecar_path(key: &Path) -> PathBuf {
    let mut s = key.as_os_str().to_os_string();
    s.push(".offset");
    PathBuf::from(s)
}

/// Opens the key file at the sidecar cursor (or an explicit override) and
/// exposes the remainder as a finite tape.
pub fn load_key(path: &Path, offset_override: Option<u64>) -> Result<(KeyState, KeyTape)> {
    let data = fs::read(path)?;
    let start = match offset_override {
        Some(o) => o,
        None => {
            let side = sidecar_path(path);
            if side.exists() {
                let text = fs::read_to_string(&side)?;
                text.trim().parse::<u64>().map_err(|_| {
                    Error::InvalidParameter(format!("unreadable cursor in {}", side.display()))
                })?
            } else {
                0
            }
        }
    };
    if start > data.len() as u64 {
        return Err(Error::KeyExhausted { needed: start * 8, available: data.len() as u64 * 8 });
    }
    let tape = KeyTape::from_bytes(&data[start as usize..]);
    Ok((KeyState { path: path.to_path_buf(), start_byte: start }, tape))
}

/// Moves the sidecar cursor past the consumed bits, rounded up to whole
/// bytes so the offset stays byte-addressable. The sidecar is replaced
/// atomically; returns (new offset, pad bits wasted by the rounding).
pub fn advance_key(state: &KeyState, consumed_bits: u64) -> Result<(u64, u64)> {
    let used_bytes = consumed_bits.div_ceil(8);
    let wasted = used_bytes * 8 - consumed_bits;
    let new_offset = state.start_byte + used_bytes;
    let side = sidecar_path(&state.path);
    let mut tmp = side.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, format!("{}\n", new_offset))?;
    fs::rename(&tmp, &side)?;
    Ok((new_offset, wasted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_framing_round_trips() {
        let data = [0xA5u8, 0x01, 0xFF, 0x00];
        let x = bytes_to_sequence(&data, SymbolMode::Bits, 2).unwrap();
        assert_eq!(x.len(), 32);
        assert_eq!(&x.symbols()[..8], &[1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(sequence_to_bytes(&x, SymbolMode::Bits).unwrap(), data);
    }

    #[test]
    fn byte_framing_round_trips() {
        let data = [3u8, 0, 255, 17];
        let x = bytes_to_sequence(&data, SymbolMode::Bytes, 256).unwrap();
        assert_eq!(x.len(), 4);
        assert_eq!(sequence_to_bytes(&x, SymbolMode::Bytes).unwrap(), data);
    }

    #[test]
    fn framing_defaults() {
        assert_eq!(resolve_framing(None, None).unwrap(), (SymbolMode::Bits, 2));
        assert_eq!(resolve_framing(None, Some(2)).unwrap(), (SymbolMode::Bits, 2));
        assert_eq!(resolve_framing(None, Some(16)).unwrap(), (SymbolMode::Bytes, 16));
        assert_eq!(resolve_framing(Some(SymbolMode::Bytes), None).unwrap(), (SymbolMode::Bytes, 256));
        assert!(resolve_framing(Some(SymbolMode::Bits), Some(4)).is_err());
    }

    #[test]
    fn unaligned_bit_output_is_rejected() {
        let x = Sequence::binary(&[0, 1, 0]).unwrap();
        assert!(sequence_to_bytes(&x, SymbolMode::Bits).is_err());
        assert_eq!(sequence_to_bytes(&x, SymbolMode::Bytes).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn key_cursor_advances_by_whole_bytes() {
        let dir = std::env::temp_dir().join(format!("fse-symio-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let key = dir.join("k.key");
        fs::write(&key, [0u8; 64]).unwrap();

        let (state, tape) = load_key(&key, None).unwrap();
        assert_eq!(state.start_byte, 0);
        assert_eq!(tape.remaining(), Some(512));
        let (off, wasted) = advance_key(&state, 13).unwrap();
        assert_eq!((off, wasted), (2, 3));

        let (state, tape) = load_key(&key, None).unwrap();
        assert_eq!(state.start_byte, 2);
        assert_eq!(tape.remaining(), Some(496));
        let (off, wasted) = advance_key(&state, 16).unwrap();
        assert_eq!((off, wasted), (4, 0));

        let (state, _) = load_key(&key, Some(60)).unwrap();
        assert_eq!(state.start_byte, 60);
        assert!(load_key(&key, Some(65)).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
