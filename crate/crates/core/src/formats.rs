//! Binary symbol and field files.
//!
//! Both formats are little-endian: a 32-byte header followed by interleaved
//! float64 samples `(re_x, im_x, re_y, im_y)`.
//!
//! Symbol file header:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 4    | magic `CCSY`                           |
//! | 4      | 2    | version (1)                            |
//! | 6      | 1    | pairing mode (0 intra, 1 inter)        |
//! | 7      | 1    | flags (bit 0: interleaved)             |
//! | 8      | 4    | DM block length `n`                    |
//! | 12     | 4    | FEC block length                       |
//! | 16     | 8    | seed                                   |
//! | 24     | 8    | symbol count per polarization          |
//!
//! Field file header:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 4    | magic `CCFD`                           |
//! | 4      | 2    | version (1)                            |
//! | 6      | 2    | reserved (0)                           |
//! | 8      | 8    | sample rate, Hz (f64)                  |
//! | 16     | 8    | center offset, Hz (f64)                |
//! | 24     | 8    | sample count per polarization          |

use std::path::Path;

use num_complex::Complex64;

use crate::channel::OpticalField;
use crate::mapping::{PairingMode, QamFrame};

pub const SYMBOL_MAGIC: [u8; 4] = *b"CCSY";
pub const FIELD_MAGIC: [u8; 4] = *b"CCFD";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("file shorter than the {HEADER_LEN}-byte header ({0} bytes)")]
    Truncated(usize),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown pairing mode code {0}")]
    BadPairing(u8),
    #[error("header announces {count} symbols but the payload holds {payload} bytes")]
    PayloadLength { count: u64, payload: usize },
    #[error("invalid header field: {0}")]
    BadHeader(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolHeader {
    pub pairing_mode: PairingMode,
    pub interleaved: bool,
    pub block_length_n: u32,
    pub fec_block_len: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFile {
    pub header: SymbolHeader,
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl SymbolFile {
    pub fn from_frame(frame: &QamFrame) -> Self {
        Self {
            header: SymbolHeader {
                pairing_mode: frame.pairing_mode,
                interleaved: frame.interleaved.is_some(),
                block_length_n: frame.block_length_n as u32,
                fec_block_len: frame.fec_block_len as u32,
                seed: frame.seed,
            },
            x: frame.symbols_x.clone(),
            y: frame.symbols_y.clone(),
        }
    }
}

fn put_samples(out: &mut Vec<u8>, x: &[Complex64], y: &[Complex64]) {
    for (a, b) in x.iter().zip(y) {
        for v in [a.re, a.im, b.re, b.im] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn get_samples(payload: &[u8], count: u64) -> Result<(Vec<Complex64>, Vec<Complex64>), FormatError> {
    let expected = count.checked_mul(32).and_then(|b| usize::try_from(b).ok());
    if expected != Some(payload.len()) {
        return Err(FormatError::PayloadLength {
            count,
            payload: payload.len(),
        });
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
    let mut x = Vec::with_capacity(count as usize);
    let mut y = Vec::with_capacity(count as usize);
    for rec in payload.chunks_exact(32) {
        x.push(Complex64::new(f(&rec[0..8]), f(&rec[8..16])));
        y.push(Complex64::new(f(&rec[16..24]), f(&rec[24..32])));
    }
    Ok((x, y))
}

fn check_preamble(bytes: &[u8], magic: [u8; 4]) -> Result<(), FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated(bytes.len()));
    }
    let found: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
    if found != magic {
        return Err(FormatError::BadMagic(found));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    Ok(())
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn encode_symbol_file(file: &SymbolFile) -> Vec<u8> {
    assert_eq!(file.x.len(), file.y.len(), "polarization length mismatch");
    let h = &file.header;
    let mut out = Vec::with_capacity(HEADER_LEN + 32 * file.x.len());
    out.extend_from_slice(&SYMBOL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(match h.pairing_mode {
        PairingMode::Intra => 0,
        PairingMode::Inter => 1,
    });
    out.push(u8::from(h.interleaved));
    out.extend_from_slice(&h.block_length_n.to_le_bytes());
    out.extend_from_slice(&h.fec_block_len.to_le_bytes());
    out.extend_from_slice(&h.seed.to_le_bytes());
    out.extend_from_slice(&(file.x.len() as u64).to_le_bytes());
    put_samples(&mut out, &file.x, &file.y);
    out
}

pub fn decode_symbol_file(bytes: &[u8]) -> Result<SymbolFile, FormatError> {
    check_preamble(bytes, SYMBOL_MAGIC)?;
    let pairing_mode = match bytes[6] {
        0 => PairingMode::Intra,
        1 => PairingMode::Inter,
        other => return Err(FormatError::BadPairing(other)),
    };
    if bytes[7] & !1 != 0 {
        return Err(FormatError::BadHeader("unknown flag bits"));
    }
    let header = SymbolHeader {
        pairing_mode,
        interleaved: bytes[7] & 1 == 1,
        block_length_n: u32_at(bytes, 8),
        fec_block_len: u32_at(bytes, 12),
        seed: u64_at(bytes, 16),
    };
    let (x, y) = get_samples(&bytes[HEADER_LEN..], u64_at(bytes, 24))?;
    Ok(SymbolFile { header, x, y })
}

pub fn encode_field_file(field: &OpticalField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 32 * field.len());
    out.extend_from_slice(&FIELD_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&field.sample_rate.to_le_bytes());
    out.extend_from_slice(&field.center_offset.to_le_bytes());
    out.extend_from_slice(&(field.len() as u64).to_le_bytes());
    put_samples(&mut out, &field.x, &field.y);
    out
}

pub fn decode_field_file(bytes: &[u8]) -> Result<OpticalField, FormatError> {
    check_preamble(bytes, FIELD_MAGIC)?;
    if bytes[6] != 0 || bytes[7] != 0 {
        return Err(FormatError::BadHeader("reserved bytes must be zero"));
    }
    let sample_rate = f64::from_bits(u64_at(bytes, 8));
    let center_offset = f64::from_bits(u64_at(bytes, 16));
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(FormatError::BadHeader("sample rate must be positive"));
    }
    if !center_offset.is_finite() {
        return Err(FormatError::BadHeader("center offset must be finite"));
    }
    let (x, y) = get_samples(&bytes[HEADER_LEN..], u64_at(bytes, 24))?;
    Ok(OpticalField {
        x,
        y,
        sample_rate,
        center_offset,
    })
}

pub fn write_symbol_file(path: &Path, file: &SymbolFile) -> Result<(), FormatError> {
    std::fs::write(path, encode_symbol_file(file))?;
    Ok(())
}

pub fn read_symbol_file(path: &Path) -> Result<SymbolFile, FormatError> {
    decode_symbol_file(&std::fs::read(path)?)
}

pub fn write_field_file(path: &Path, field: &OpticalField) -> Result<(), FormatError> {
    std::fs::write(path, encode_field_file(field))?;
    Ok(())
}

pub fn read_field_file(path: &Path) -> Result<OpticalField, FormatError> {
    decode_field_file(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_file() -> SymbolFile {
        SymbolFile {
            header: SymbolHeader {
                pairing_mode: PairingMode::Inter,
                interleaved: true,
                block_length_n: 100,
                fec_block_len: 10_800,
                seed: 0xDEAD_BEEF,
            },
            x: vec![Complex64::new(1.0, -3.0), Complex64::new(0.5, 0.25)],
            y: vec![Complex64::new(-7.0, 5.0), Complex64::new(0.0, -0.0)],
        }
    }

    #[test]
    fn symbol_header_layout() {
        let bytes = encode_symbol_file(&sample_file());
        assert_eq!(bytes.len(), HEADER_LEN + 64);
        assert_eq!(&bytes[0..4], b"CCSY");
        assert_eq!(bytes[4..6], [1, 0]);
        assert_eq!(bytes[6], 1);
        assert_eq!(bytes[7], 1);
        assert_eq!(u32_at(&bytes, 8), 100);
        assert_eq!(u64_at(&bytes, 24), 2);
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(bytes[48..56].try_into().unwrap()), -7.0);
        assert_eq!(decode_symbol_file(&bytes).unwrap(), sample_file());
    }

    #[test]
    fn symbol_decode_errors() {
        let good = encode_symbol_file(&sample_file());
        assert!(matches!(decode_symbol_file(&good[..10]), Err(FormatError::Truncated(10))));
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_symbol_file(&bad), Err(FormatError::BadMagic(_))));
        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(decode_symbol_file(&bad), Err(FormatError::UnsupportedVersion(9))));
        let mut bad = good.clone();
        bad[6] = 7;
        assert!(matches!(decode_symbol_file(&bad), Err(FormatError::BadPairing(7))));
        assert!(matches!(
            decode_symbol_file(&good[..good.len() - 1]),
            Err(FormatError::PayloadLength { .. })
        ));
        let mut huge = good.clone();
        huge[24..32].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode_symbol_file(&huge), Err(FormatError::PayloadLength { .. })));
    }

    #[test]
    fn field_round_trip_and_errors() {
        let mut f = OpticalField::new(sample_file().x, sample_file().y, 256e9);
        f.center_offset = -50e9;
        let bytes = encode_field_file(&f);
        assert_eq!(decode_field_file(&bytes).unwrap(), f);
        let mut bad = bytes.clone();
        bad[8..16].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert!(matches!(decode_field_file(&bad), Err(FormatError::BadHeader(_))));
        assert!(matches!(decode_field_file(&encode_symbol_file(&sample_file())), Err(FormatError::BadMagic(_))));
    }

    proptest! {
        #[test]
        fn symbol_file_round_trips(
            samples in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>(), any::<f64>()), 0..40),
            n in any::<u32>(), seed in any::<u64>(), inter in any::<bool>(), il in any::<bool>(),
        ) {
            let file = SymbolFile {
                header: SymbolHeader {
                    pairing_mode: if inter { PairingMode::Inter } else { PairingMode::Intra },
                    interleaved: il,
                    block_length_n: n,
                    fec_block_len: 10_800,
                    seed,
                },
                x: samples.iter().map(|s| Complex64::new(s.0, s.1)).collect(),
                y: samples.iter().map(|s| Complex64::new(s.2, s.3)).collect(),
            };
            let back = decode_symbol_file(&encode_symbol_file(&file)).unwrap();
            prop_assert_eq!(encode_symbol_file(&back), encode_symbol_file(&file));
        }

        #[test]
        fn decoders_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
            let _ = decode_symbol_file(&bytes);
            let _ = decode_field_file(&bytes);
        }
    }
}
