//! Topic files exchanged between subcommands.
//!
//! JSON: `{"model": ..., "topics": [{"label", "words", "weights", "distribution"?}], "metadata": {...}}`
//! with words given as tokens. A plain-text file with one whitespace-separated
//! topic per line is accepted as input too.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use topiceval_core::divergence::TopicWordDist;
use topiceval_core::textprep::Vocabulary;
use topiceval_core::topics::{TopicEntry, TopicSet};

use crate::archive::write_atomic;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub label: i64,
    pub words: Vec<String>,
    #[serde(default)]
    pub weights: Vec<f64>,
    /// Full word distribution over the corpus vocabulary, in id order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsFile {
    pub model: String,
    pub topics: Vec<TopicRecord>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub metadata: serde_json::Value,
}

impl TopicsFile {
    pub fn from_topic_set(model: &str, set: &TopicSet, vocab: &Vocabulary, metadata: serde_json::Value) -> Self {
        let topics = set
            .topics
            .iter()
            .map(|t| TopicRecord {
                label: t.label,
                words: t
                    .words
                    .iter()
                    .map(|&w| vocab.token(w).unwrap_or("<unk>").to_owned())
                    .collect(),
                weights: t.weights.clone(),
                distribution: t.distribution.as_ref().map(|d| d.as_slice().to_vec()),
            })
            .collect();
        Self {
            model: model.into(),
            topics,
            metadata,
        }
    }

    /// Map the topic words back to ids of `vocab`.
    pub fn to_topic_set(&self, vocab: &Vocabulary) -> Result<TopicSet> {
        let mut topics = Vec::with_capacity(self.topics.len());
        for t in &self.topics {
            let words = t
                .words
                .iter()
                .map(|w| {
                    vocab
                        .id(w)
                        .ok_or_else(|| CliError::Data(format!("topic {}: word '{w}' is not in the corpus vocabulary", t.label)))
                })
                .collect::<Result<Vec<u32>>>()?;
            let distribution = match &t.distribution {
                Some(d) if d.len() != vocab.len() => {
                    return Err(CliError::Data(format!(
                        "topic {}: distribution has {} entries for a vocabulary of {}",
                        t.label,
                        d.len(),
                        vocab.len()
                    )))
                }
                Some(d) => Some(TopicWordDist::new(d.clone())?),
                None => None,
            };
            topics.push(TopicEntry {
                label: t.label,
                words,
                weights: t.weights.clone(),
                distribution,
            });
        }
        Ok(TopicSet::new(topics))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::unreadable(path, e))?;
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())));
        }
        let topics = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| TopicRecord {
                label: i as i64,
                words: l.split_whitespace().map(str::to_owned).collect(),
                weights: Vec::new(),
                distribution: None,
            })
            .collect();
        Ok(Self {
            model: "text".into(),
            topics,
            metadata: serde_json::Value::Null,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(path, &bytes)
    }
}
