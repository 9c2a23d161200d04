//! Occurrence and co-occurrence counts over virtual documents.
//!
//! A virtual document is either a whole document or one sliding window of
//! tokens. Occurrence is boolean per virtual document; repeated tokens inside
//! one virtual document count once.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::BowCorpus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CooccurError {
    #[error("word set is empty")]
    EmptyWordSet,
    #[error("word id {0} is not covered by these statistics")]
    UnknownWord(u32),
    #[error("word id {id} is outside the vocabulary (size {vocab_size})")]
    OutOfVocabulary { id: u32, vocab_size: usize },
    #[error("window size and step must be at least 1 (got size {size}, step {step})")]
    InvalidWindow { size: usize, step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountMode {
    Document,
    Window { size: usize, step: usize },
}

/// Counts for a fixed word set. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    mode: CountMode,
    n_virtual: u64,
    /// Sorted, distinct word ids.
    words: Vec<u32>,
    index: HashMap<u32, usize>,
    occur: Vec<u64>,
    /// Strict upper triangle of the joint matrix, row-major.
    joint: Vec<u64>,
}

fn tri_index(m: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < m);
    // rows 0..a hold (m-1) + (m-2) + ... + (m-a) entries
    a * (2 * m - a - 1) / 2 + (b - a - 1)
}

#[derive(Clone)]
struct Counts {
    n_virtual: u64,
    occur: Vec<u64>,
    joint: Vec<u64>,
}

impl Counts {
    fn zeros(m: usize) -> Self {
        Self {
            n_virtual: 0,
            occur: vec![0; m],
            joint: vec![0; m * m.saturating_sub(1) / 2],
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        self.n_virtual += other.n_virtual;
        for (a, b) in self.occur.iter_mut().zip(other.occur) {
            *a += b;
        }
        for (a, b) in self.joint.iter_mut().zip(other.joint) {
            *a += b;
        }
        self
    }

    /// Count one virtual document whose present local ids are `present`
    /// (distinct), weighted by `times`.
    fn add_set(&mut self, present: &mut [usize], times: u64) {
        let m = self.occur.len();
        present.sort_unstable();
        for (x, &a) in present.iter().enumerate() {
            self.occur[a] += times;
            for &b in &present[x + 1..] {
                self.joint[tri_index(m, a, b)] += times;
            }
        }
    }
}

fn prepare_words(words: &[u32]) -> Result<(Vec<u32>, HashMap<u32, usize>), CooccurError> {
    if words.is_empty() {
        return Err(CooccurError::EmptyWordSet);
    }
    let mut sorted = words.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let index = sorted.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    Ok((sorted, index))
}

/// Whole-document counting over a bag-of-words corpus.
pub fn count_document_stats(
    corpus: &BowCorpus,
    words: &[u32],
) -> Result<CooccurrenceStats, CooccurError> {
    let (sorted, index) = prepare_words(words)?;
    let vocab_size = corpus.vocab.len();
    if let Some(&id) = sorted.iter().find(|&&w| w as usize >= vocab_size) {
        return Err(CooccurError::OutOfVocabulary { id, vocab_size });
    }
    let m = sorted.len();
    let counts = corpus
        .docs
        .par_iter()
        .fold(
            || Counts::zeros(m),
            |mut acc, doc| {
                let mut present: Vec<usize> =
                    doc.iter().filter_map(|(id, _)| index.get(id).copied()).collect();
                acc.n_virtual += 1;
                acc.add_set(&mut present, 1);
                acc
            },
        )
        .reduce(|| Counts::zeros(m), Counts::merge);
    Ok(CooccurrenceStats::from_counts(CountMode::Document, sorted, index, counts))
}

/// Number of windows a document of `len` tokens contributes.
pub fn window_count(len: usize, size: usize, step: usize) -> u64 {
    if len <= size {
        1
    } else {
        ((len - size) / step + 1) as u64
    }
}

/// Sliding-window counting over token-id sequences.
///
/// Each document yields every exact-size window at the given stride; a
/// document no longer than `size` yields one window holding the whole
/// document. Windows never span documents and truncated tail windows are not
/// emitted.
pub fn count_window_stats(
    docs: &[Vec<u32>],
    words: &[u32],
    size: usize,
    step: usize,
) -> Result<CooccurrenceStats, CooccurError> {
    if size == 0 || step == 0 {
        return Err(CooccurError::InvalidWindow { size, step });
    }
    let (sorted, index) = prepare_words(words)?;
    let m = sorted.len();
    let counts = docs
        .par_iter()
        .fold(
            || Counts::zeros(m),
            |mut acc, doc| {
                let local: Vec<Option<usize>> = doc.iter().map(|w| index.get(w).copied()).collect();
                count_doc_windows(&local, size, step, &mut acc);
                acc
            },
        )
        .reduce(|| Counts::zeros(m), Counts::merge);
    Ok(CooccurrenceStats::from_counts(
        CountMode::Window { size, step },
        sorted,
        index,
        counts,
    ))
}

/// Interval sweep over the windows of one document.
///
/// Each tracked word is present over runs of consecutive windows. When a run
/// for word `a` ends at window `t`, every word `b` still present shares
/// `t - max(start_a, start_b)` windows with it. Each overlapping pair is
/// settled exactly once, by whichever run ends first.
fn count_doc_windows(local: &[Option<usize>], size: usize, step: usize, acc: &mut Counts) {
    let len = local.len();
    let n_windows = window_count(len, size, step) as usize;
    acc.n_virtual += n_windows as u64;
    if len <= size {
        let mut present: Vec<usize> = local.iter().flatten().copied().collect();
        present.sort_unstable();
        present.dedup();
        acc.add_set(&mut present, 1);
        return;
    }

    let m = acc.occur.len();
    let mut in_window: HashMap<usize, u32> = HashMap::new();
    let mut start: HashMap<usize, u64> = HashMap::new();
    // present words in insertion order; position map for O(1) removal
    let mut present: Vec<usize> = Vec::new();
    let mut pos: HashMap<usize, usize> = HashMap::new();

    let close = |a: usize,
                     t: u64,
                     present: &mut Vec<usize>,
                     pos: &mut HashMap<usize, usize>,
                     start: &mut HashMap<usize, u64>,
                     acc: &mut Counts| {
        let sa = start.remove(&a).expect("open run");
        let p = pos.remove(&a).expect("present word");
        present.swap_remove(p);
        if p < present.len() {
            pos.insert(present[p], p);
        }
        acc.occur[a] += t - sa;
        for &b in present.iter() {
            let sb = start[&b];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            acc.joint[tri_index(m, lo, hi)] += t - sa.max(sb);
        }
    };

    let mut prev: Option<(usize, usize)> = None;
    for t in 0..n_windows {
        let (s, e) = (t * step, t * step + size);
        let mut leaving: Vec<usize> = Vec::new();
        let mut entering: Vec<usize> = Vec::new();
        match prev {
            Some((ps, pe)) if s < pe => {
                for w in local[ps..s].iter().flatten() {
                    let c = in_window.get_mut(w).expect("counted");
                    *c -= 1;
                    if *c == 0 {
                        in_window.remove(w);
                        leaving.push(*w);
                    }
                }
                for w in local[pe..e].iter().flatten() {
                    let c = in_window.entry(*w).or_insert(0);
                    *c += 1;
                    if *c == 1 {
                        entering.push(*w);
                    }
                }
            }
            _ => {
                leaving.extend(in_window.keys().copied());
                in_window.clear();
                for w in local[s..e].iter().flatten() {
                    let c = in_window.entry(*w).or_insert(0);
                    *c += 1;
                    if *c == 1 {
                        entering.push(*w);
                    }
                }
            }
        }
        // a word that left and re-entered within the same step stays present
        leaving.retain(|w| !in_window.contains_key(w));
        entering.retain(|w| !start.contains_key(w));
        leaving.sort_unstable();
        for a in leaving {
            close(a, t as u64, &mut present, &mut pos, &mut start, acc);
        }
        for a in entering {
            start.insert(a, t as u64);
            pos.insert(a, present.len());
            present.push(a);
        }
        prev = Some((s, e));
    }
    let mut remaining = present.clone();
    remaining.sort_unstable();
    for a in remaining {
        close(a, n_windows as u64, &mut present, &mut pos, &mut start, acc);
    }
}

impl CooccurrenceStats {
    fn from_counts(
        mode: CountMode,
        words: Vec<u32>,
        index: HashMap<u32, usize>,
        counts: Counts,
    ) -> Self {
        Self {
            mode,
            n_virtual: counts.n_virtual.max(1),
            words,
            index,
            occur: counts.occur,
            joint: counts.joint,
        }
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    pub fn n_virtual(&self) -> u64 {
        self.n_virtual
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn contains(&self, w: u32) -> bool {
        self.index.contains_key(&w)
    }

    fn local(&self, w: u32) -> Result<usize, CooccurError> {
        self.index.get(&w).copied().ok_or(CooccurError::UnknownWord(w))
    }

    /// Number of virtual documents containing `w`.
    pub fn occur(&self, w: u32) -> Result<u64, CooccurError> {
        Ok(self.occur[self.local(w)?])
    }

    /// Number of virtual documents containing both words. For `a == b` this is
    /// the occurrence count.
    pub fn joint(&self, a: u32, b: u32) -> Result<u64, CooccurError> {
        let (x, y) = (self.local(a)?, self.local(b)?);
        Ok(match x.cmp(&y) {
            std::cmp::Ordering::Equal => self.occur[x],
            std::cmp::Ordering::Less => self.joint[tri_index(self.words.len(), x, y)],
            std::cmp::Ordering::Greater => self.joint[tri_index(self.words.len(), y, x)],
        })
    }

    pub fn prob(&self, w: u32) -> Result<f64, CooccurError> {
        Ok(self.occur(w)? as f64 / self.n_virtual as f64)
    }

    pub fn joint_prob(&self, a: u32, b: u32) -> Result<f64, CooccurError> {
        Ok(self.joint(a, b)? as f64 / self.n_virtual as f64)
    }

    /// Every unordered pair as `(word_i, word_j, joint, occur_i, occur_j)`,
    /// ordered by ids.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32, u64, u64, u64)> + '_ {
        let m = self.words.len();
        (0..m).flat_map(move |a| {
            (a + 1..m).map(move |b| {
                (
                    self.words[a],
                    self.words[b],
                    self.joint[tri_index(m, a, b)],
                    self.occur[a],
                    self.occur[b],
                )
            })
        })
    }
}
