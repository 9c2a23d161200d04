//! Scoring shared by `coherence`, `diversity`, `evaluate` and `sweep`.

use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use topiceval_core::coherence::{score_topics, stats_for, CoherenceConfig, CoherenceMeasure, Topic};
use topiceval_core::cooccur::CooccurrenceStats;
use topiceval_core::divergence::{avg_pairwise_divergence, unique_word_diversity, DivergenceMeasure};
use topiceval_core::embed::{run_pipeline, EmbeddingMatrix, PipelineConfig, PipelineOutput};
use topiceval_core::topics::TopicSet;

use crate::archive::CorpusArchive;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiversityKind {
    /// Fraction of distinct words among all topics' top words.
    Unique,
    Jsd,
    Hellinger,
    Cosine,
}

impl DiversityKind {
    pub fn name(self) -> &'static str {
        match self {
            DiversityKind::Unique => "unique",
            DiversityKind::Jsd => "jsd",
            DiversityKind::Hellinger => "hellinger",
            DiversityKind::Cosine => "cosine",
        }
    }
}

impl FromStr for DiversityKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| CliError::Usage(format!("unknown diversity measure '{s}'")))
    }
}

/// Coherence scores of a topic set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceScores {
    pub measure: String,
    pub window: Option<usize>,
    pub top_n: usize,
    /// Labels of the scored topics, aligned with `per_topic`.
    pub labels: Vec<i64>,
    pub per_topic: Vec<f64>,
    pub mean: f64,
    /// Labels of topics left out for having fewer than two words.
    pub skipped: Vec<i64>,
}

/// Top-`n` word lists of every topic with at least two words.
pub fn scorable_topics(set: &TopicSet, top_n: usize) -> Result<(Vec<i64>, Vec<Topic>, Vec<i64>)> {
    let mut labels = Vec::new();
    let mut topics = Vec::new();
    let mut skipped = Vec::new();
    for t in &set.topics {
        let words = t.top(top_n);
        if words.len() < 2 {
            skipped.push(t.label);
            continue;
        }
        labels.push(t.label);
        topics.push(Topic::new(words.to_vec())?);
    }
    if !skipped.is_empty() {
        log::warn!("skipping {} topic(s) with fewer than two words: {skipped:?}", skipped.len());
    }
    if topics.is_empty() {
        return Err(CliError::Data("no topic has at least two words to score".into()));
    }
    Ok((labels, topics, skipped))
}

pub fn coherence_stats(archive: &CorpusArchive, set: &TopicSet, cfg: &CoherenceConfig) -> Result<CooccurrenceStats> {
    let (_, topics, _) = scorable_topics(set, cfg.top_n)?;
    Ok(stats_for(&topics, &archive.corpus, &archive.sequences, cfg)?)
}

pub fn score_coherence(archive: &CorpusArchive, set: &TopicSet, cfg: &CoherenceConfig) -> Result<CoherenceScores> {
    let (labels, topics, skipped) = scorable_topics(set, cfg.top_n)?;
    let per_topic = score_topics(&topics, &archive.corpus, &archive.sequences, cfg)?;
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceScores {
        measure: cfg.measure.name().to_owned(),
        window: (cfg.measure != CoherenceMeasure::Umass).then_some(cfg.window_size),
        top_n: cfg.top_n,
        labels,
        per_topic,
        mean,
        skipped,
    })
}

pub fn score_diversity(set: &TopicSet, kind: DiversityKind, top_n: usize) -> Result<f64> {
    let measure = match kind {
        DiversityKind::Unique => return Ok(unique_word_diversity(set, top_n)?),
        DiversityKind::Jsd => DivergenceMeasure::Jsd,
        DiversityKind::Hellinger => DivergenceMeasure::Hellinger,
        DiversityKind::Cosine => DivergenceMeasure::Cosine,
    };
    let dists = set
        .distributions()
        .ok_or_else(|| CliError::Data(format!("{} diversity needs full topic-word distributions", kind.name())))?;
    Ok(avg_pairwise_divergence(&dists, measure)?.average)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub coherence: CoherenceConfig,
    pub diversity: DiversityKind,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            coherence: CoherenceConfig::default(),
            diversity: DiversityKind::Unique,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub coherence: CoherenceScores,
    pub diversity: f64,
    pub k: usize,
}

pub fn evaluate_topics(archive: &CorpusArchive, set: &TopicSet, settings: &EvalSettings) -> Result<Evaluation> {
    Ok(Evaluation {
        coherence: score_coherence(archive, set, &settings.coherence)?,
        diversity: score_diversity(set, settings.diversity, settings.coherence.top_n)?,
        k: set.len(),
    })
}

/// Run the embedding pipeline and score its topics.
pub fn evaluate_pipeline(
    archive: &CorpusArchive,
    embeddings: &EmbeddingMatrix,
    pipeline: &PipelineConfig,
    settings: &EvalSettings,
) -> Result<(PipelineOutput, Evaluation)> {
    let out = run_pipeline(&archive.corpus, embeddings, pipeline)?;
    let eval = evaluate_topics(archive, &out.topics, settings)?;
    Ok((out, eval))
}
