//! Dissimilarity between topic-word distributions.
//!
//! All logarithms here are base 2 so that Jensen-Shannon divergence lies in
//! `[0, 1]`. Terms with `p_i = 0` contribute nothing (`0 · log 0 = 0`).

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topics::TopicSet;

#[derive(Debug, Error, PartialEq)]
pub enum DivergenceError {
    #[error("distribution has a negative or non-finite entry at index {0}")]
    InvalidEntry(usize),
    #[error("distribution sums to {0}, expected 1")]
    NotNormalized(f64),
    #[error("distributions have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("KL divergence is infinite: p > 0 where q = 0 at index {0}")]
    InfiniteDivergence(usize),
    #[error("cosine distance undefined for a zero vector")]
    ZeroVector,
    #[error("need at least 2 topics, got {0}")]
    TooFewTopics(usize),
    #[error("topic {topic} has {len} words, fewer than the requested {n}")]
    TopicTooSmall { topic: usize, len: usize, n: usize },
}

const SUM_TOLERANCE: f64 = 1e-9;

/// A probability vector over vocabulary ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TopicWordDist(Vec<f64>);

impl TopicWordDist {
    pub fn new(probs: Vec<f64>) -> Result<Self, DivergenceError> {
        if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(DivergenceError::InvalidEntry(i));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(DivergenceError::NotNormalized(sum));
        }
        Ok(Self(probs))
    }

    /// Normalize non-negative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self, DivergenceError> {
        if let Some(i) = weights.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(DivergenceError::InvalidEntry(i));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(DivergenceError::ZeroVector);
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for TopicWordDist {
    type Error = DivergenceError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<TopicWordDist> for Vec<f64> {
    fn from(d: TopicWordDist) -> Self {
        d.0
    }
}

fn same_len(p: &[f64], q: &[f64]) -> Result<(), DivergenceError> {
    if p.len() != q.len() {
        return Err(DivergenceError::LengthMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// `Σ p_i log2(p_i / q_i)`.
pub fn kl(p: &[f64], q: &[f64]) -> Result<f64, DivergenceError> {
    same_len(p, q)?;
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(DivergenceError::InfiniteDivergence(i));
        }
        total += pi * (pi / qi).log2();
    }
    Ok(total.max(0.0))
}

pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64, DivergenceError> {
    same_len(p, q)?;
    // Each term folds p_i log2(p_i / m_i) with m_i = (p_i + q_i) / 2.
    let half_kl = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else {
            a * (2.0 * a / (a + b)).log2()
        }
    };
    let total: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| 0.5 * half_kl(a, b) + 0.5 * half_kl(b, a))
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64, DivergenceError> {
    same_len(p, q)?;
    let sq: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    Ok((sq.sqrt() / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

pub fn cosine_distance(p: &[f64], q: &[f64]) -> Result<f64, DivergenceError> {
    same_len(p, q)?;
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let np = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nq = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if np == 0.0 || nq == 0.0 {
        return Err(DivergenceError::ZeroVector);
    }
    Ok((1.0 - dot / (np * nq)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceMeasure {
    Jsd,
    Hellinger,
    Cosine,
}

impl DivergenceMeasure {
    pub fn apply(self, p: &[f64], q: &[f64]) -> Result<f64, DivergenceError> {
        match self {
            Self::Jsd => jsd(p, q),
            Self::Hellinger => hellinger(p, q),
            Self::Cosine => cosine_distance(p, q),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Jsd => "jsd",
            Self::Hellinger => "hellinger",
            Self::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for DivergenceMeasure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsd" => Ok(Self::Jsd),
            "hellinger" => Ok(Self::Hellinger),
            "cosine" => Ok(Self::Cosine),
            other => Err(format!("unknown divergence measure '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub measure: DivergenceMeasure,
    /// Symmetric K×K matrix with a zero diagonal, row-major.
    pub pairwise: Vec<Vec<f64>>,
    /// Mean over the strict upper triangle.
    pub average: f64,
}

pub fn avg_pairwise_divergence(
    topics: &[TopicWordDist],
    measure: DivergenceMeasure,
) -> Result<DivergenceReport, DivergenceError> {
    let k = topics.len();
    if k < 2 {
        return Err(DivergenceError::TooFewTopics(k));
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| measure.apply(topics[i].as_slice(), topics[j].as_slice()))
        .collect::<Result<Vec<f64>, _>>()?;

    let mut pairwise = vec![vec![0.0; k]; k];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        pairwise[i][j] = v;
        pairwise[j][i] = v;
    }
    let average = values.iter().sum::<f64>() * 2.0 / (k * (k - 1)) as f64;
    Ok(DivergenceReport {
        measure,
        pairwise,
        average,
    })
}

/// Fraction of distinct words among all topics' top-`n` lists.
pub fn unique_word_diversity(topics: &TopicSet, n: usize) -> Result<f64, DivergenceError> {
    if topics.is_empty() {
        return Err(DivergenceError::TooFewTopics(0));
    }
    let mut seen = HashSet::new();
    for (i, t) in topics.topics.iter().enumerate() {
        if t.words.len() < n || n == 0 {
            return Err(DivergenceError::TopicTooSmall {
                topic: i,
                len: t.words.len(),
                n,
            });
        }
        seen.extend(t.words[..n].iter().copied());
    }
    Ok(seen.len() as f64 / (topics.len() * n) as f64)
}
