//! Tokenization, vocabulary construction, bag-of-words and TF-IDF.

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("corpus contains no documents")]
    EmptyCorpus,
    #[error("invalid token length window [{min}, {max}]")]
    InvalidLengthWindow { min: usize, max: usize },
    #[error("corpus has {docs} documents but {ids} document ids")]
    IdCountMismatch { docs: usize, ids: usize },
}

/// The pinned English stopword list shipped with the crate.
pub fn english_stopwords() -> HashSet<String> {
    STOPWORDS_EN
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    /// Minimum token length in characters.
    pub min_token_len: usize,
    /// Maximum token length in characters.
    pub max_token_len: usize,
    pub alphabetic_only: bool,
    /// Compared against the lowercased token.
    pub stopwords: HashSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            min_token_len: 2,
            max_token_len: 15,
            alphabetic_only: true,
            stopwords: english_stopwords(),
        }
    }
}

impl TokenizerConfig {
    /// Defaults without any stopword filtering.
    pub fn without_stopwords() -> Self {
        Self {
            stopwords: HashSet::new(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TextError> {
        if self.min_token_len == 0 || self.min_token_len > self.max_token_len {
            return Err(TextError::InvalidLengthWindow {
                min: self.min_token_len,
                max: self.max_token_len,
            });
        }
        Ok(())
    }
}

/// Split raw text into normalized tokens.
///
/// Text is NFC-normalized and (optionally) lowercased before splitting. With
/// `strip_punctuation` every non-alphanumeric character acts as a separator,
/// so hyphenated words split into their parts; otherwise only whitespace
/// separates tokens.
pub fn tokenize(raw: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let normalized: String = raw.nfc().collect();
    let text = if cfg.lowercase {
        normalized.to_lowercase()
    } else {
        normalized
    };

    let is_separator = |c: char| {
        if cfg.strip_punctuation {
            !c.is_alphanumeric()
        } else {
            c.is_whitespace()
        }
    };

    text.split(is_separator)
        .filter(|tok| !tok.is_empty())
        .filter(|tok| {
            let len = tok.chars().count();
            len >= cfg.min_token_len && len <= cfg.max_token_len
        })
        .filter(|tok| !cfg.alphabetic_only || tok.chars().all(char::is_alphabetic))
        .filter(|tok| {
            if cfg.stopwords.is_empty() {
                return true;
            }
            if cfg.lowercase {
                !cfg.stopwords.contains(*tok)
            } else {
                !cfg.stopwords.contains(&tok.to_lowercase())
            }
        })
        .map(str::to_owned)
        .collect()
}

/// Bidirectional token ↔ id map with document frequencies.
///
/// Ids are assigned in sorted token order, so the same documents always yield
/// the same ids regardless of document order or thread count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    token_of: Vec<String>,
    doc_freq: Vec<u64>,
    n_docs: u64,
    #[serde(skip)]
    id_of: HashMap<String, u32>,
}

impl Vocabulary {
    /// Rebuild a vocabulary from its stored parts. Tokens must be distinct.
    pub fn from_parts(token_of: Vec<String>, doc_freq: Vec<u64>, n_docs: u64) -> Self {
        assert_eq!(token_of.len(), doc_freq.len(), "token/doc_freq length mismatch");
        let id_of = token_of
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            token_of,
            doc_freq,
            n_docs,
            id_of,
        }
    }

    pub fn len(&self) -> usize {
        self.token_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_of.is_empty()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.id_of.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.token_of.get(id as usize).map(String::as_str)
    }

    pub fn doc_freq(&self, id: u32) -> u64 {
        self.doc_freq.get(id as usize).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> &[String] {
        &self.token_of
    }

    pub fn doc_freqs(&self) -> &[u64] {
        &self.doc_freq
    }

    /// Must be called after deserializing, since the reverse map is not stored.
    pub fn rebuild_index(&mut self) {
        self.id_of = self
            .token_of
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }
}

pub fn build_vocabulary<S: AsRef<str> + Sync>(docs: &[Vec<S>]) -> Result<Vocabulary, TextError> {
    if docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let merged: HashMap<&str, u64> = docs
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<&str, u64>, doc| {
            let unique: HashSet<&str> = doc.iter().map(AsRef::as_ref).collect();
            for tok in unique {
                *acc.entry(tok).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (tok, n) in b {
                *a.entry(tok).or_insert(0) += n;
            }
            a
        });

    let mut entries: Vec<(&str, u64)> = merged.into_iter().collect();
    entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
    let (tokens, dfs): (Vec<String>, Vec<u64>) =
        entries.into_iter().map(|(t, n)| (t.to_owned(), n)).unzip();
    Ok(Vocabulary::from_parts(tokens, dfs, docs.len() as u64))
}

/// Sparse bag-of-words for one document: ids ascending, counts positive.
pub fn doc2bow<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<(u32, u64)> {
    let ids = encode(tokens, vocab);
    bow_from_ids(&ids)
}

/// Map tokens to ids in order, dropping out-of-vocabulary tokens.
pub fn encode<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<u32> {
    tokens.iter().filter_map(|t| vocab.id(t.as_ref())).collect()
}

/// Collapse an id sequence into sorted (id, count) pairs.
pub fn bow_from_ids(ids: &[u32]) -> Vec<(u32, u64)> {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    let mut bow: Vec<(u32, u64)> = Vec::new();
    for id in sorted {
        match bow.last_mut() {
            Some((last, n)) if *last == id => *n += 1,
            _ => bow.push((id, 1)),
        }
    }
    bow
}

/// Per-document sparse counts over one vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct BowCorpus {
    pub vocab: Vocabulary,
    pub docs: Vec<Vec<(u32, u64)>>,
    pub doc_ids: Vec<String>,
}

impl BowCorpus {
    /// Build vocabulary and bag-of-words from tokenized documents. Document ids
    /// default to the row index.
    pub fn from_tokens<S: AsRef<str> + Sync>(docs: &[Vec<S>]) -> Result<Self, TextError> {
        let vocab = build_vocabulary(docs)?;
        let bows = docs.par_iter().map(|d| doc2bow(d, &vocab)).collect();
        let doc_ids = (0..docs.len()).map(|i| i.to_string()).collect();
        Ok(Self {
            vocab,
            docs: bows,
            doc_ids,
        })
    }

    pub fn with_doc_ids(mut self, ids: Vec<String>) -> Result<Self, TextError> {
        if ids.len() != self.docs.len() {
            return Err(TextError::IdCountMismatch {
                docs: self.docs.len(),
                ids: ids.len(),
            });
        }
        self.doc_ids = ids;
        Ok(self)
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_len(&self, d: usize) -> u64 {
        self.docs[d].iter().map(|&(_, c)| c).sum()
    }

    /// Total count of every vocabulary id over the corpus.
    pub fn term_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.vocab.len()];
        for doc in &self.docs {
            for &(id, c) in doc {
                totals[id as usize] += c;
            }
        }
        totals
    }
}

/// Sparse TF-IDF weights, one row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfMatrix {
    pub n_cols: usize,
    pub rows: Vec<Vec<(u32, f64)>>,
}

impl TfidfMatrix {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.n_cols);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                m[(r, c as usize)] = w;
            }
        }
        m
    }
}

/// `count(d,t) · ln(n_docs / doc_freq(t))`, unsmoothed.
pub fn tfidf(corpus: &BowCorpus) -> Result<TfidfMatrix, TextError> {
    if corpus.docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let n = corpus.vocab.n_docs() as f64;
    let idf: Vec<f64> = corpus
        .vocab
        .doc_freqs()
        .iter()
        .map(|&df| if df == 0 { 0.0 } else { (n / df as f64).ln() })
        .collect();
    let rows = corpus
        .docs
        .iter()
        .map(|doc| {
            doc.iter()
                .map(|&(id, c)| (id, c as f64 * idf[id as usize]))
                .collect()
        })
        .collect();
    Ok(TfidfMatrix {
        n_cols: corpus.vocab.len(),
        rows,
    })
}
