use serde::{Deserialize, Serialize};

use crate::divergence::TopicWordDist;

/// One extracted topic: ranked word ids with their weights and, when the model
/// provides one, a full word distribution over the vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEntry {
    /// Model-specific label (topic index or cluster id).
    pub label: i64,
    pub words: Vec<u32>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<TopicWordDist>,
}

impl TopicEntry {
    /// First `n` ranked words (fewer if the topic is shorter).
    pub fn top(&self, n: usize) -> &[u32] {
        &self.words[..n.min(self.words.len())]
    }
}

/// The K topics produced by one model run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopicSet {
    pub topics: Vec<TopicEntry>,
}

impl TopicSet {
    pub fn new(topics: Vec<TopicEntry>) -> Self {
        Self { topics }
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Word distributions of every topic, if all topics carry one.
    pub fn distributions(&self) -> Option<Vec<TopicWordDist>> {
        self.topics.iter().map(|t| t.distribution.clone()).collect()
    }

    /// Sorted, de-duplicated ids of every word in any topic's top-`n` list.
    pub fn word_ids(&self, n: usize) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .topics
            .iter()
            .flat_map(|t| t.top(n).iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}
