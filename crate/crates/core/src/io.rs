//! Binary database files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "DADB"
//!      4     2  version (1)
//!      6     8  rows
//!     14     8  columns
//!     22     *  rows * columns one-byte symbols, row-major, values 1..=255
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymbolMatrix;
use crate::synth::RepetitionPattern;

pub const MAGIC: [u8; 4] = *b"DADB";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 22;

pub fn write_matrix<W: Write>(mut w: W, matrix: &SymbolMatrix) -> std::io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4..6].copy_from_slice(&VERSION.to_le_bytes());
    header[6..14].copy_from_slice(&(matrix.rows() as u64).to_le_bytes());
    header[14..22].copy_from_slice(&(matrix.cols() as u64).to_le_bytes());
    w.write_all(&header)?;
    // Stored symbols are zero-based; the file holds 1..=|X|.
    let body: Vec<u8> = matrix.as_slice().iter().map(|&s| s + 1).collect();
    w.write_all(&body)
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<SymbolMatrix> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("short header: {e}")))?;
    if header[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(header[6..14].try_into().unwrap());
    let cols = u64::from_le_bytes(header[14..22].try_into().unwrap());
    let len = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::Format(format!("{rows}x{cols} does not fit in memory")))?;
    let mut body = Vec::with_capacity(len);
    r.take(len as u64 + 1)
        .read_to_end(&mut body)
        .map_err(|e| Error::Format(e.to_string()))?;
    if body.len() != len {
        return Err(Error::Format(format!(
            "expected {len} symbol bytes, found {}",
            body.len()
        )));
    }
    if body.contains(&0) {
        return Err(Error::Format("symbol 0 outside the alphabet".into()));
    }
    body.iter_mut().for_each(|s| *s -= 1);
    SymbolMatrix::new(rows as usize, cols as usize, body)
}

pub fn save_matrix(path: &Path, matrix: &SymbolMatrix) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_matrix(&mut w, matrix)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_matrix(path: &Path) -> Result<SymbolMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(std::io::BufReader::new(file))
}

/// Hidden ground truth of a generated instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub sigma: Vec<usize>,
    pub pattern: RepetitionPattern,
    pub seed: u64,
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let m = SymbolMatrix::from_rows(&[[0u8, 2], [1, 0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(&buf[..4], b"DADB");
        assert_eq!(&buf[4..6], &[1, 0]);
        assert_eq!(buf[6], 2);
        assert_eq!(buf[14], 2);
        assert_eq!(&buf[22..], &[1, 3, 2, 1]);
        assert_eq!(read_matrix(&buf[..]).unwrap(), m);
    }

    #[test]
    fn rejects_corruption() {
        let m = SymbolMatrix::filled(2, 2, 0);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert!(read_matrix(&buf[..buf.len() - 1]).is_err());
        let mut long = buf.clone();
        long.push(1);
        assert!(read_matrix(&long[..]).is_err());
        let mut zero = buf.clone();
        zero[22] = 0;
        assert!(read_matrix(&zero[..]).is_err());
        let mut magic = buf;
        magic[0] = b'X';
        assert!(read_matrix(&magic[..]).is_err());
    }
}
