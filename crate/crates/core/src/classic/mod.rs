//! Baseline topic models: LDA by collapsed Gibbs sampling and NMF by
//! multiplicative updates.

mod lda;
mod nmf;

use thiserror::Error;

use crate::coherence::{CoherenceError, Topic};
use crate::divergence::DivergenceError;

pub use lda::{lda_fit, lda_phi, lda_theta, lda_topic_set, LdaConfig, LdaSampler, LdaState};
pub use nmf::{nmf_fit, nmf_topic_set, NmfConfig, NmfFactors};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("corpus contains no documents")]
    EmptyCorpus,
    #[error("document {0} has no tokens")]
    EmptyDocument(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input matrix has a negative or non-finite entry at ({0}, {1})")]
    NegativeInput(usize, usize),
    #[error("rank {k} exceeds min(rows, cols) = {max}")]
    InvalidRank { k: usize, max: usize },
    #[error(transparent)]
    Topic(#[from] CoherenceError),
    #[error(transparent)]
    Distribution(#[from] DivergenceError),
}

/// Indices of the `n` largest weights, ties broken by ascending index.
pub fn top_indices(weights: &[f64], n: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..weights.len() as u32).collect();
    idx.sort_by(|&a, &b| {
        weights[b as usize]
            .total_cmp(&weights[a as usize])
            .then(a.cmp(&b))
    });
    idx.truncate(n);
    idx
}

/// Ranked top-`n` words of a weight vector as a [`Topic`].
pub fn topic_top_words(weights: &[f64], n: usize) -> Result<Topic, ModelError> {
    if n > weights.len() {
        return Err(ModelError::InvalidConfig(format!(
            "requested {n} top words from a vocabulary of {}",
            weights.len()
        )));
    }
    Ok(Topic::new(top_indices(weights, n))?)
}
