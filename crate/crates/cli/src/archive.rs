//! Preprocessed corpus archive.
//!
//! A single JSON header line (vocabulary, document ids, tokenizer settings and
//! payload checksum) followed by a little-endian binary payload:
//!
//! ```text
//! for each document:  u32 n_entries, then n_entries × (u32 id, u64 count)
//! for each document:  u32 length,    then length × u32 id   (token order)
//! ```
//!
//! Token order is kept because sliding-window coherence needs it.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use topiceval_core::textprep::{bow_from_ids, build_vocabulary, encode, tokenize, BowCorpus, TokenizerConfig, Vocabulary};

use crate::error::{CliError, Result};
use crate::loaders::RawDoc;

const FORMAT_TAG: &str = "topiceval-corpus";
const FORMAT_VERSION: u32 = 1;

/// Tokenizer settings as stored in the archive (stopwords sorted so the file
/// is byte-deterministic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizerSettings {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub min_token_len: usize,
    pub max_token_len: usize,
    pub alphabetic_only: bool,
    pub stopwords: Vec<String>,
}

impl From<&TokenizerConfig> for TokenizerSettings {
    fn from(c: &TokenizerConfig) -> Self {
        let stopwords: BTreeSet<&String> = c.stopwords.iter().collect();
        Self {
            lowercase: c.lowercase,
            strip_punctuation: c.strip_punctuation,
            min_token_len: c.min_token_len,
            max_token_len: c.max_token_len,
            alphabetic_only: c.alphabetic_only,
            stopwords: stopwords.into_iter().cloned().collect(),
        }
    }
}

impl From<&TokenizerSettings> for TokenizerConfig {
    fn from(s: &TokenizerSettings) -> Self {
        Self {
            lowercase: s.lowercase,
            strip_punctuation: s.strip_punctuation,
            min_token_len: s.min_token_len,
            max_token_len: s.max_token_len,
            alphabetic_only: s.alphabetic_only,
            stopwords: s.stopwords.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    n_docs: usize,
    tokens: Vec<String>,
    doc_freq: Vec<u64>,
    doc_ids: Vec<String>,
    tokenizer: TokenizerSettings,
    payload_len: usize,
    payload_crc32: u32,
}

/// A tokenized corpus: bag-of-words counts plus the ordered token-id
/// sequences they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusArchive {
    pub corpus: BowCorpus,
    pub sequences: Vec<Vec<u32>>,
    pub tokenizer: TokenizerSettings,
}

impl CorpusArchive {
    /// Tokenize raw documents and build the vocabulary.
    pub fn build(docs: &[RawDoc], cfg: &TokenizerConfig) -> Result<Self> {
        cfg.validate()?;
        let tokens: Vec<Vec<String>> = docs.par_iter().map(|d| tokenize(&d.text, cfg)).collect();
        let vocab = build_vocabulary(&tokens)?;
        let sequences: Vec<Vec<u32>> = tokens.par_iter().map(|t| encode(t, &vocab)).collect();
        let bows = sequences.par_iter().map(|s| bow_from_ids(s)).collect();
        let corpus = BowCorpus {
            vocab,
            docs: bows,
            doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        };
        Ok(Self {
            corpus,
            sequences,
            tokenizer: cfg.into(),
        })
    }

    pub fn n_tokens(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut payload = Vec::new();
        for doc in &self.corpus.docs {
            payload.extend_from_slice(&(doc.len() as u32).to_le_bytes());
            for &(id, c) in doc {
                payload.extend_from_slice(&id.to_le_bytes());
                payload.extend_from_slice(&c.to_le_bytes());
            }
        }
        for seq in &self.sequences {
            payload.extend_from_slice(&(seq.len() as u32).to_le_bytes());
            for &id in seq {
                payload.extend_from_slice(&id.to_le_bytes());
            }
        }
        let vocab = &self.corpus.vocab;
        let header = Header {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            n_docs: self.corpus.n_docs(),
            tokens: vocab.tokens().to_vec(),
            doc_freq: vocab.doc_freqs().to_vec(),
            doc_ids: self.corpus.doc_ids.clone(),
            tokenizer: self.tokenizer.clone(),
            payload_len: payload.len(),
            payload_crc32: crc32fast::hash(&payload),
        };
        let mut out = serde_json::to_vec(&header)?;
        out.push(b'\n');
        out.extend_from_slice(&payload);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: String| CliError::Data(format!("malformed corpus archive: {msg}"));
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header line".into()))?;
        let header: Header = serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(e.to_string()))?;
        if header.format != FORMAT_TAG {
            return Err(bad(format!("unexpected format tag '{}'", header.format)));
        }
        if header.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", header.version)));
        }
        let payload = &bytes[nl + 1..];
        if payload.len() != header.payload_len {
            return Err(bad(format!(
                "payload is {} bytes, header says {}",
                payload.len(),
                header.payload_len
            )));
        }
        if crc32fast::hash(payload) != header.payload_crc32 {
            return Err(bad("payload checksum mismatch".into()));
        }
        let v = header.tokens.len();
        if header.doc_freq.len() != v || header.doc_ids.len() != header.n_docs {
            return Err(bad("header arrays have inconsistent lengths".into()));
        }

        let mut cur = Cursor { buf: payload, pos: 0 };
        let mut docs = Vec::with_capacity(header.n_docs);
        for _ in 0..header.n_docs {
            let n = cur.u32().ok_or_else(|| bad("truncated payload".into()))? as usize;
            let mut doc = Vec::with_capacity(n);
            for _ in 0..n {
                let id = cur.u32().ok_or_else(|| bad("truncated payload".into()))?;
                let c = cur.u64().ok_or_else(|| bad("truncated payload".into()))?;
                if id as usize >= v || c == 0 {
                    return Err(bad(format!("invalid entry ({id}, {c})")));
                }
                doc.push((id, c));
            }
            docs.push(doc);
        }
        let mut sequences = Vec::with_capacity(header.n_docs);
        for _ in 0..header.n_docs {
            let n = cur.u32().ok_or_else(|| bad("truncated payload".into()))? as usize;
            let mut seq = Vec::with_capacity(n);
            for _ in 0..n {
                let id = cur.u32().ok_or_else(|| bad("truncated payload".into()))?;
                if id as usize >= v {
                    return Err(bad(format!("token id {id} out of range")));
                }
                seq.push(id);
            }
            sequences.push(seq);
        }
        if cur.pos != payload.len() {
            return Err(bad("trailing payload bytes".into()));
        }
        let vocab = Vocabulary::from_parts(header.tokens, header.doc_freq, header.n_docs as u64);
        Ok(Self {
            corpus: BowCorpus {
                vocab,
                docs,
                doc_ids: header.doc_ids,
            },
            sequences,
            tokenizer: header.tokenizer,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        write_atomic(path, &bytes)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::unreadable(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let s = self.buf.get(self.pos..self.pos + N)?;
        self.pos += N;
        s.try_into().ok()
    }

    fn u32(&mut self) -> Option<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Option<u64> {
        self.take::<8>().map(u64::from_le_bytes)
    }
}

/// Write through a sibling temporary file and rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
