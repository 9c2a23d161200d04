//! The EMB1 container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "EMB1" (45 4D 42 31)
//! 4       4     version, u32 LE (= 1)
//! 8       8     n_docs, u64 LE
//! 16      4     dim, u32 LE
//! 20      1     dtype (1 = f32 LE)
//! 21      3     zero padding
//! 24      4·n·d row-major f32 LE payload
//! ...     4     CRC-32 of the payload bytes, u32 LE
//! ```
//!
//! Document ids live in a JSON-lines sidecar next to the file
//! (`name.emb` → `name.ids.jsonl`), one `{"id": ...}` record per row.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EmbedError, EmbeddingMatrix};

pub const EMB_MAGIC: [u8; 4] = *b"EMB1";
pub const EMB_VERSION: u32 = 1;
pub const EMB_HEADER_LEN: usize = 24;
const DTYPE_F32: u8 = 1;

#[derive(Serialize, Deserialize)]
struct IdRecord {
    id: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("ids.jsonl")
}

/// Serialize the matrix (values narrowed to f32) without the sidecar.
pub fn encode_embeddings(m: &EmbeddingMatrix) -> Result<Vec<u8>, EmbedError> {
    let payload_len = m.data().len() * 4;
    let mut out = Vec::with_capacity(EMB_HEADER_LEN + payload_len + 4);
    out.extend_from_slice(&EMB_MAGIC);
    out.extend_from_slice(&EMB_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.n_docs() as u64).to_le_bytes());
    out.extend_from_slice(&(m.dim() as u32).to_le_bytes());
    out.push(DTYPE_F32);
    out.extend_from_slice(&[0, 0, 0]);
    for (i, &x) in m.data().iter().enumerate() {
        let v = x as f32;
        if !v.is_finite() {
            return Err(EmbedError::NonFiniteValue {
                row: i / m.dim(),
                col: i % m.dim(),
            });
        }
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out[EMB_HEADER_LEN..]);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Parse an EMB1 byte buffer. Ids default to the row index when `None`.
pub fn decode_embeddings(bytes: &[u8], doc_ids: Option<Vec<String>>) -> Result<EmbeddingMatrix, EmbedError> {
    if bytes.len() < EMB_HEADER_LEN {
        return Err(EmbedError::TruncatedFile {
            expected: EMB_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
    if magic != EMB_MAGIC {
        return Err(EmbedError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != EMB_VERSION {
        return Err(EmbedError::UnsupportedVersion(version));
    }
    let n_docs = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let dim = u32::from_le_bytes(bytes[16..20].try_into().expect("4 bytes")) as usize;
    let dtype = bytes[20];
    if dtype != DTYPE_F32 {
        return Err(EmbedError::UnsupportedDtype(dtype));
    }
    if n_docs == 0 {
        return Err(EmbedError::EmptyEmbeddings);
    }
    if dim == 0 {
        return Err(EmbedError::ZeroDimension);
    }
    let payload_len = n_docs
        .checked_mul(dim)
        .and_then(|x| x.checked_mul(4))
        .ok_or(EmbedError::TruncatedFile {
            expected: usize::MAX,
            actual: bytes.len(),
        })?;
    let expected = EMB_HEADER_LEN + payload_len + 4;
    if bytes.len() < expected {
        return Err(EmbedError::TruncatedFile {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(EmbedError::TrailingData(bytes.len() - expected));
    }
    let payload = &bytes[EMB_HEADER_LEN..EMB_HEADER_LEN + payload_len];
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(EmbedError::ChecksumMismatch { stored, computed });
    }
    let mut data = Vec::with_capacity(n_docs * dim);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        if !v.is_finite() {
            return Err(EmbedError::NonFiniteValue {
                row: i / dim,
                col: i % dim,
            });
        }
        data.push(v as f64);
    }
    let ids = doc_ids.unwrap_or_else(|| (0..n_docs).map(|i| i.to_string()).collect());
    EmbeddingMatrix::new(n_docs, dim, data, ids)
}

/// Raw little-endian f32 bytes of row `i` as stored on disk.
pub fn row_bytes(m: &EmbeddingMatrix, i: usize) -> Vec<u8> {
    m.row(i).iter().flat_map(|&x| (x as f32).to_le_bytes()).collect()
}

/// Write `path` and its id sidecar.
pub fn write_embeddings(path: &Path, m: &EmbeddingMatrix) -> Result<(), EmbedError> {
    let bytes = encode_embeddings(m)?;
    fs::write(path, bytes)?;
    let mut sidecar = std::io::BufWriter::new(fs::File::create(sidecar_path(path))?);
    for id in m.doc_ids() {
        let line = serde_json::to_string(&IdRecord { id: id.clone() }).map_err(|e| EmbedError::Sidecar(e.to_string()))?;
        writeln!(sidecar, "{line}")?;
    }
    sidecar.flush()?;
    Ok(())
}

/// Read an EMB1 file, taking document ids from the sidecar when present.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix, EmbedError> {
    let bytes = fs::read(path)?;
    let side = sidecar_path(path);
    let ids = if side.exists() {
        let reader = BufReader::new(fs::File::open(&side)?);
        let mut ids = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: IdRecord =
                serde_json::from_str(&line).map_err(|e| EmbedError::Sidecar(format!("line {}: {e}", n + 1)))?;
            ids.push(rec.id);
        }
        Some(ids)
    } else {
        None
    };
    decode_embeddings(&bytes, ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmbeddingMatrix {
        EmbeddingMatrix::new(
            2,
            3,
            vec![0.5, -1.25, 3.0, 1e-3, 0.0, -7.5],
            vec!["doc-a".into(), "doc \"b\"".into()],
        )
        .unwrap()
    }

    #[test]
    fn header_layout_is_bit_exact() {
        let bytes = encode_embeddings(&sample()).unwrap();
        assert_eq!(&bytes[0..4], &[0x45, 0x4D, 0x42, 0x31]);
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&bytes[16..20], &[3, 0, 0, 0]);
        assert_eq!(&bytes[20..24], &[1, 0, 0, 0]);
        assert_eq!(bytes.len(), 24 + 2 * 3 * 4 + 4);
        assert_eq!(&bytes[24..28], &0.5f32.to_le_bytes());
        let crc = crc32fast::hash(&bytes[24..48]);
        assert_eq!(&bytes[48..52], &crc.to_le_bytes());
    }

    #[test]
    fn file_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.emb");
        let m = sample();
        write_embeddings(&path, &m).unwrap();
        let back = load_embeddings(&path).unwrap();
        let f32_exact: Vec<f64> = m.data().iter().map(|&x| x as f32 as f64).collect();
        assert_eq!(back.data(), &f32_exact[..]);
        assert_eq!(back.doc_ids(), m.doc_ids());
        write_embeddings(&dir.path().join("y.emb"), &back).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(dir.path().join("y.emb")).unwrap());
        assert_eq!(sidecar_path(&path), dir.path().join("x.ids.jsonl"));
    }

    #[test]
    fn missing_sidecar_uses_row_indices() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.emb");
        fs::write(&path, encode_embeddings(&sample()).unwrap()).unwrap();
        assert_eq!(load_embeddings(&path).unwrap().doc_ids(), &["0", "1"]);
    }

    #[test]
    fn decode_errors() {
        let good = encode_embeddings(&sample()).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_embeddings(&bad, None), Err(EmbedError::BadMagic(_))));

        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(decode_embeddings(&bad, None), Err(EmbedError::UnsupportedVersion(2)));

        let mut bad = good.clone();
        bad[20] = 2;
        assert_eq!(decode_embeddings(&bad, None), Err(EmbedError::UnsupportedDtype(2)));

        assert!(matches!(
            decode_embeddings(&good[..good.len() - 1], None),
            Err(EmbedError::TruncatedFile { .. })
        ));
        assert!(matches!(decode_embeddings(&good[..10], None), Err(EmbedError::TruncatedFile { .. })));

        let mut bad = good.clone();
        bad.push(0);
        assert_eq!(decode_embeddings(&bad, None), Err(EmbedError::TrailingData(1)));

        let mut bad = good.clone();
        bad[30] ^= 0xFF;
        assert!(matches!(decode_embeddings(&bad, None), Err(EmbedError::ChecksumMismatch { .. })));

        // NaN in the payload with a valid checksum
        let mut bad = good.clone();
        bad[24..28].copy_from_slice(&f32::NAN.to_le_bytes());
        let crc = crc32fast::hash(&bad[24..48]);
        bad[48..52].copy_from_slice(&crc.to_le_bytes());
        assert_eq!(
            decode_embeddings(&bad, None),
            Err(EmbedError::NonFiniteValue { row: 0, col: 0 })
        );

        let mut empty = good[..24].to_vec();
        empty[8..16].copy_from_slice(&0u64.to_le_bytes());
        empty.extend_from_slice(&crc32fast::hash(&[]).to_le_bytes());
        assert_eq!(decode_embeddings(&empty, None), Err(EmbedError::EmptyEmbeddings));

        assert!(matches!(
            decode_embeddings(&good, Some(vec!["only-one".into()])),
            Err(EmbedError::SidecarMismatch { ids: 1, n_docs: 2 })
        ));
    }
}
