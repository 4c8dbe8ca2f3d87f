//! Binary dump format for matrices, used by the CLI's `--dump-matrices`
//! flag so solved relations can be inspected or diffed offline.
//!
//! Layout: 4-byte magic `MLMX`, one element-kind byte (0 = bit entries as
//! single bytes, 1 = little-endian `f64`), a little-endian `u64` dimension,
//! then the row-major payload. The reader validates magic, kind, and
//! payload length.

use super::{BitMatrix, RealMatrix};
use std::fmt;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"MLMX";
const KIND_BIT: u8 = 0;
const KIND_REAL: u8 = 1;

/// A matrix read back from a dump.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixPayload {
    Bit(BitMatrix),
    Real(RealMatrix),
}

/// Errors from reading or writing matrix dumps.
#[derive(Debug)]
pub enum DumpError {
    Io(std::io::Error),
    BadMagic([u8; 4]),
    BadKind(u8),
    /// Payload ended early or had trailing bytes for the declared size.
    LengthMismatch { expected: usize, got: usize },
    /// A bit-kind payload contained a byte other than 0 or 1.
    BadBit { offset: usize, value: u8 },
}

impl fmt::Display for DumpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DumpError::Io(e) => write!(f, "matrix dump i/o error: {e}"),
            DumpError::BadMagic(m) => write!(f, "not a matrix dump (magic {m:?})"),
            DumpError::BadKind(k) => write!(f, "unknown element kind {k}"),
            DumpError::LengthMismatch { expected, got } => {
                write!(f, "payload length mismatch: expected {expected} bytes, got {got}")
            }
            DumpError::BadBit { offset, value } => {
                write!(f, "bit payload byte {offset} is {value}, not 0/1")
            }
        }
    }
}

impl std::error::Error for DumpError {}

impl From<std::io::Error> for DumpError {
    fn from(e: std::io::Error) -> Self {
        DumpError::Io(e)
    }
}

/// Writes one matrix in dump format.
pub fn write_matrix(w: &mut dyn Write, m: &MatrixPayload) -> Result<(), DumpError> {
    w.write_all(MAGIC)?;
    match m {
        MatrixPayload::Bit(b) => {
            w.write_all(&[KIND_BIT])?;
            w.write_all(&(b.n() as u64).to_le_bytes())?;
            w.write_all(b.data())?;
        }
        MatrixPayload::Real(r) => {
            w.write_all(&[KIND_REAL])?;
            w.write_all(&(r.n() as u64).to_le_bytes())?;
            for v in r.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads one matrix in dump format, validating the header and payload.
pub fn read_matrix(r: &mut dyn Read) -> Result<MatrixPayload, DumpError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DumpError::BadMagic(magic));
    }
    let mut kind = [0u8; 1];
    r.read_exact(&mut kind)?;
    let mut nbuf = [0u8; 8];
    r.read_exact(&mut nbuf)?;
    let n = u64::from_le_bytes(nbuf) as usize;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    match kind[0] {
        KIND_BIT => {
            if payload.len() != n * n {
                return Err(DumpError::LengthMismatch { expected: n * n, got: payload.len() });
            }
            if let Some(offset) = payload.iter().position(|&v| v > 1) {
                return Err(DumpError::BadBit { offset, value: payload[offset] });
            }
            Ok(MatrixPayload::Bit(BitMatrix { n, data: payload }))
        }
        KIND_REAL => {
            if payload.len() != n * n * 8 {
                return Err(DumpError::LengthMismatch { expected: n * n * 8, got: payload.len() });
            }
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            Ok(MatrixPayload::Real(RealMatrix { n, data }))
        }
        k => Err(DumpError::BadKind(k)),
    }
}
