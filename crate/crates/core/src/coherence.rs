//! Topic coherence: segmentation, confirmation and aggregation over
//! co-occurrence statistics.
//!
//! Three measures are provided:
//!
//! * C_UMass: ordered word pairs, document counts, smoothed log conditional
//!   probability, mean.
//! * C_NPMI: unordered word pairs, sliding-window probabilities, NPMI, mean.
//! * C_v: one word against the topic, NPMI context vectors compared by cosine,
//!   mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cooccur::{count_document_stats, count_window_stats, CooccurError, CooccurrenceStats, CountMode};
use crate::textprep::BowCorpus;

#[derive(Debug, Error, PartialEq)]
pub enum CoherenceError {
    #[error("topic has {0} words, at least 2 are required")]
    TopicTooSmall(usize),
    #[error("word id {0} appears twice in the topic")]
    DuplicateWord(u32),
    #[error("word id {0} does not occur in the corpus")]
    WordNotInCorpus(u32),
    #[error("zero-norm context vector for word id {0:?}")]
    ZeroVector(Option<u32>),
    #[error("no scores to aggregate")]
    EmptyScores,
    #[error("{measure} needs {expected} statistics")]
    ModeMismatch {
        measure: &'static str,
        expected: &'static str,
    },
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Cooccur(#[from] CooccurError),
}

/// Ranked top-N word ids of a topic (rank = descending topic weight).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    words: Vec<u32>,
}

impl Topic {
    pub fn new(words: Vec<u32>) -> Result<Self, CoherenceError> {
        if words.len() < 2 {
            return Err(CoherenceError::TopicTooSmall(words.len()));
        }
        let mut seen = std::collections::HashSet::with_capacity(words.len());
        for &w in &words {
            if !seen.insert(w) {
                return Err(CoherenceError::DuplicateWord(w));
            }
        }
        Ok(Self { words })
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// A list of `(W', W*)` word-set pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub pairs: Vec<(Vec<u32>, Vec<u32>)>,
}

/// `({w_i}, T \ {w_i})` for every word.
pub fn segment_one_set(topic: &Topic) -> Segmentation {
    let w = topic.words();
    let pairs = (0..w.len())
        .map(|i| {
            let rest = w
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &x)| x)
                .collect();
            (vec![w[i]], rest)
        })
        .collect();
    Segmentation { pairs }
}

/// `({w_i}, {w_j})` for every `i < j` by rank.
pub fn segment_pairwise(topic: &Topic) -> Segmentation {
    let w = topic.words();
    let mut pairs = Vec::with_capacity(w.len() * (w.len() - 1) / 2);
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            pairs.push((vec![w[i]], vec![w[j]]));
        }
    }
    Segmentation { pairs }
}

/// NPMI from raw virtual-document counts.
///
/// A pair that never co-occurs scores -1 and a pair present in every virtual
/// document scores 1; both are the limits of the formula.
pub fn npmi_from_counts(joint: u64, occur_p: u64, occur_q: u64, n_virtual: u64) -> f64 {
    if joint == 0 {
        return -1.0;
    }
    if joint >= n_virtual {
        return 1.0;
    }
    // Ratios of exact integer products keep j = a = b at exactly 1 and make
    // the value symmetric in (a, b) bit for bit.
    let (j, a, b, n) = (joint as f64, occur_p as f64, occur_q as f64, n_virtual as f64);
    let pmi = ((j * n) / (a * b)).ln();
    let norm = (n / j).ln();
    (pmi / norm).clamp(-1.0, 1.0)
}

pub fn npmi(p: u32, q: u32, stats: &CooccurrenceStats) -> Result<f64, CoherenceError> {
    Ok(npmi_from_counts(
        stats.joint(p, q)?,
        stats.occur(p)?,
        stats.occur(q)?,
        stats.n_virtual(),
    ))
}

/// NPMI of `w` against every topic word, with the diagonal fixed at 1.
pub fn npmi_vector(w: u32, topic: &Topic, stats: &CooccurrenceStats) -> Result<Vec<f64>, CoherenceError> {
    topic
        .words()
        .iter()
        .map(|&x| if x == w { Ok(1.0) } else { npmi(w, x, stats) })
        .collect()
}

pub fn umass_coherence(topic: &Topic, stats: &CooccurrenceStats, epsilon: f64) -> Result<f64, CoherenceError> {
    if stats.mode() != CountMode::Document {
        return Err(CoherenceError::ModeMismatch {
            measure: "C_UMass",
            expected: "document-mode",
        });
    }
    if !(epsilon > 0.0) {
        return Err(CoherenceError::InvalidEpsilon(epsilon));
    }
    let w = topic.words();
    for &x in w {
        if stats.occur(x)? == 0 {
            return Err(CoherenceError::WordNotInCorpus(x));
        }
    }
    let scores = segment_pairwise(topic)
        .pairs
        .iter()
        .map(|(wi, wj)| {
            let (a, b) = (wi[0], wj[0]);
            let joint = stats.joint(a, b)? as f64;
            let denom = stats.occur(b)? as f64;
            Ok(((joint + epsilon) / denom).ln())
        })
        .collect::<Result<Vec<f64>, CoherenceError>>()?;
    aggregate_mean(&scores)
}

pub fn c_npmi(topic: &Topic, stats: &CooccurrenceStats) -> Result<f64, CoherenceError> {
    let scores = segment_pairwise(topic)
        .pairs
        .iter()
        .map(|(wi, wj)| npmi(wi[0], wj[0], stats))
        .collect::<Result<Vec<f64>, CoherenceError>>()?;
    aggregate_mean(&scores)
}

/// What each word's context vector is compared against in C_v.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvReference {
    /// Mean of all N context vectors.
    #[default]
    MeanVector,
    /// Sum of the other N-1 context vectors, `T \ {w_i}`.
    Complement,
}

pub fn c_v(topic: &Topic, stats: &CooccurrenceStats) -> Result<f64, CoherenceError> {
    c_v_with(topic, stats, CvReference::MeanVector)
}

pub fn c_v_with(topic: &Topic, stats: &CooccurrenceStats, reference: CvReference) -> Result<f64, CoherenceError> {
    let w = topic.words();
    let n = w.len();
    let vectors = w
        .iter()
        .map(|&x| npmi_vector(x, topic, stats))
        .collect::<Result<Vec<_>, _>>()?;

    let mut total = vec![0.0; n];
    for v in &vectors {
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }

    let mut scores = Vec::with_capacity(n);
    for (i, v) in vectors.iter().enumerate() {
        let reference_vec: Vec<f64> = match reference {
            CvReference::MeanVector => total.iter().map(|t| t / n as f64).collect(),
            CvReference::Complement => total.iter().zip(v).map(|(t, x)| t - x).collect(),
        };
        let nv = norm(v);
        if nv == 0.0 {
            return Err(CoherenceError::ZeroVector(Some(w[i])));
        }
        let nr = norm(&reference_vec);
        if nr == 0.0 {
            return Err(CoherenceError::ZeroVector(None));
        }
        let dot: f64 = v.iter().zip(&reference_vec).map(|(a, b)| a * b).sum();
        scores.push((dot / (nv * nr)).clamp(-1.0, 1.0));
    }
    aggregate_mean(&scores)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn aggregate_mean(scores: &[f64]) -> Result<f64, CoherenceError> {
    if scores.is_empty() {
        return Err(CoherenceError::EmptyScores);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceMeasure {
    Umass,
    CNpmi,
    CV,
}

impl CoherenceMeasure {
    pub fn default_window(self) -> Option<usize> {
        match self {
            Self::Umass => None,
            Self::CNpmi => Some(70),
            Self::CV => Some(110),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Umass => "umass",
            Self::CNpmi => "c_npmi",
            Self::CV => "c_v",
        }
    }
}

impl std::str::FromStr for CoherenceMeasure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "umass" | "u_mass" | "c_umass" => Ok(Self::Umass),
            "npmi" | "c_npmi" => Ok(Self::CNpmi),
            "c_v" | "cv" => Ok(Self::CV),
            other => Err(format!("unknown coherence measure '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceConfig {
    pub measure: CoherenceMeasure,
    /// Sliding window size in tokens (ignored by C_UMass).
    pub window_size: usize,
    pub window_step: usize,
    /// C_UMass smoothing constant.
    pub epsilon: f64,
    pub top_n: usize,
    pub cv_reference: CvReference,
}

impl CoherenceConfig {
    pub fn new(measure: CoherenceMeasure) -> Self {
        Self {
            measure,
            window_size: measure.default_window().unwrap_or(110),
            window_step: 1,
            epsilon: 1e-12,
            top_n: 10,
            cv_reference: CvReference::MeanVector,
        }
    }
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        Self::new(CoherenceMeasure::CV)
    }
}

/// Gather the statistics `cfg.measure` needs for the given topics.
///
/// `sequences` are the corpus documents as ordered token ids; C_UMass only
/// needs the bag-of-words corpus.
pub fn stats_for(
    topics: &[Topic],
    corpus: &BowCorpus,
    sequences: &[Vec<u32>],
    cfg: &CoherenceConfig,
) -> Result<CooccurrenceStats, CoherenceError> {
    let mut words: Vec<u32> = topics.iter().flat_map(|t| t.words().iter().copied()).collect();
    words.sort_unstable();
    words.dedup();
    Ok(match cfg.measure {
        CoherenceMeasure::Umass => count_document_stats(corpus, &words)?,
        _ => count_window_stats(sequences, &words, cfg.window_size, cfg.window_step)?,
    })
}

/// Score one topic against precomputed statistics.
pub fn score_topic(topic: &Topic, stats: &CooccurrenceStats, cfg: &CoherenceConfig) -> Result<f64, CoherenceError> {
    match cfg.measure {
        CoherenceMeasure::Umass => umass_coherence(topic, stats, cfg.epsilon),
        CoherenceMeasure::CNpmi => c_npmi(topic, stats),
        CoherenceMeasure::CV => c_v_with(topic, stats, cfg.cv_reference),
    }
}

/// Score every topic (in parallel) and return per-topic values.
pub fn score_topics(
    topics: &[Topic],
    corpus: &BowCorpus,
    sequences: &[Vec<u32>],
    cfg: &CoherenceConfig,
) -> Result<Vec<f64>, CoherenceError> {
    if topics.is_empty() {
        return Err(CoherenceError::EmptyScores);
    }
    let stats = stats_for(topics, corpus, sequences, cfg)?;
    topics.par_iter().map(|t| score_topic(t, &stats, cfg)).collect()
}
