use serde::{Deserialize, Serialize};

use super::{ClusterAssignment, EmbedError};
use crate::classic::top_indices;
use crate::divergence::TopicWordDist;
use crate::textprep::BowCorpus;
use crate::topics::{TopicEntry, TopicSet};

/// Class-based TF-IDF: every cluster's documents are concatenated into one
/// "class document", and a term is weighted by
/// `W(t, c) = tf(t, c) · ln(1 + A / f(t))`, where `f(t)` is the term's total
/// count over all clusters and `A` the average token count per cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtfidfModel {
    /// Cluster label of each row of `tf` / `weights`; clusters with no tokens
    /// are left out.
    pub labels: Vec<i64>,
    /// `tf[c][t]`, term counts of the concatenated cluster documents.
    pub tf: Vec<Vec<u64>>,
    /// `f(t)`, term totals over every kept cluster.
    pub term_totals: Vec<u64>,
    /// Average token count per kept cluster.
    pub avg_tokens: f64,
    pub weights: Vec<Vec<f64>>,
}

impl CtfidfModel {
    pub fn fit(corpus: &BowCorpus, assignment: &ClusterAssignment) -> Result<Self, EmbedError> {
        if assignment.labels.len() != corpus.n_docs() {
            return Err(EmbedError::MisalignedInputs(format!(
                "{} labels for {} documents",
                assignment.labels.len(),
                corpus.n_docs()
            )));
        }
        let v = corpus.vocab.len();
        let mut tf = vec![vec![0u64; v]; assignment.k];
        for (doc, &label) in corpus.docs.iter().zip(&assignment.labels) {
            if label < 0 {
                continue;
            }
            let row = &mut tf[label as usize];
            for &(w, c) in doc {
                row[w as usize] += c;
            }
        }
        let (labels, tf): (Vec<i64>, Vec<Vec<u64>>) = tf
            .into_iter()
            .enumerate()
            .filter(|(_, row)| row.iter().any(|&c| c > 0))
            .map(|(c, row)| (c as i64, row))
            .unzip();
        if labels.is_empty() {
            return Err(EmbedError::NoClusters);
        }

        let mut term_totals = vec![0u64; v];
        let mut total = 0u64;
        for row in &tf {
            for (f, &c) in term_totals.iter_mut().zip(row) {
                *f += c;
                total += c;
            }
        }
        let avg_tokens = total as f64 / labels.len() as f64;
        let idf: Vec<f64> = term_totals
            .iter()
            .map(|&f| if f == 0 { 0.0 } else { (1.0 + avg_tokens / f as f64).ln() })
            .collect();
        let weights = tf
            .iter()
            .map(|row| row.iter().zip(&idf).map(|(&c, &i)| c as f64 * i).collect())
            .collect();
        Ok(Self {
            labels,
            tf,
            term_totals,
            avg_tokens,
            weights,
        })
    }

    /// Top-`n` words per cluster by weight, ties broken by ascending id. Only
    /// words present in the cluster are ranked, so a small cluster may yield
    /// fewer than `n` words. Each topic carries its normalized weights as a
    /// word distribution.
    pub fn topics(&self, top_n: usize) -> TopicSet {
        let topics = self
            .labels
            .iter()
            .zip(&self.weights)
            .zip(&self.tf)
            .map(|((&label, w), tf)| {
                let present = tf.iter().filter(|&&c| c > 0).count();
                let words = top_indices(w, top_n.min(present));
                let weights = words.iter().map(|&i| w[i as usize]).collect();
                TopicEntry {
                    label,
                    words,
                    weights,
                    distribution: TopicWordDist::from_weights(w).ok(),
                }
            })
            .collect();
        TopicSet::new(topics)
    }
}

/// Fit c-TF-IDF over the non-noise documents and return each cluster's top words.
pub fn ctfidf(corpus: &BowCorpus, assignment: &ClusterAssignment, top_n: usize) -> Result<TopicSet, EmbedError> {
    Ok(CtfidfModel::fit(corpus, assignment)?.topics(top_n))
}
