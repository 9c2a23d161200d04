use serde::{Deserialize, Serialize};

use super::{ctfidf, hdbscan, kmeans, reduce_pca, ClusterAssignment, EmbedError, EmbeddingMatrix, HdbscanParams};
use crate::textprep::BowCorpus;
use crate::topics::TopicSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clusterer {
    Hdbscan(HdbscanParams),
    KMeans { k: usize, max_iters: usize },
}

impl Default for Clusterer {
    fn default() -> Self {
        Clusterer::Hdbscan(HdbscanParams::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Target dimension of the PCA reduction.
    pub reduce_dim: usize,
    pub clusterer: Clusterer,
    pub top_n: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            reduce_dim: 5,
            clusterer: Clusterer::default(),
            top_n: 10,
            seed: crate::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineMetadata {
    pub config: PipelineConfig,
    pub seed: u64,
    pub k: usize,
    pub noise_fraction: f64,
    pub n_docs: usize,
    /// Share of variance kept by the reduction.
    pub explained_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub topics: TopicSet,
    pub assignment: ClusterAssignment,
    pub metadata: PipelineMetadata,
}

/// Reduce, cluster and describe: PCA to `reduce_dim`, then HDBSCAN or
/// k-means, then c-TF-IDF over the non-noise clusters.
pub fn run_pipeline(
    corpus: &BowCorpus,
    embeddings: &EmbeddingMatrix,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput, EmbedError> {
    if corpus.n_docs() != embeddings.n_docs() {
        return Err(EmbedError::MisalignedInputs(format!(
            "{} corpus documents but {} embedding rows",
            corpus.n_docs(),
            embeddings.n_docs()
        )));
    }
    if let Some(i) = corpus.doc_ids.iter().zip(embeddings.doc_ids()).position(|(a, b)| a != b) {
        return Err(EmbedError::MisalignedInputs(format!(
            "row {i}: corpus id {:?} vs embedding id {:?}",
            corpus.doc_ids[i],
            embeddings.doc_ids()[i]
        )));
    }

    let reduced = reduce_pca(embeddings, cfg.reduce_dim.min(embeddings.dim()))?;
    let assignment = match cfg.clusterer {
        Clusterer::Hdbscan(params) => hdbscan(&reduced.projected, params)?,
        Clusterer::KMeans { k, max_iters } => kmeans(&reduced.projected, k, cfg.seed, max_iters)?.assignment,
    };
    log::info!(
        "clustered {} documents into {} clusters ({} noise)",
        assignment.labels.len(),
        assignment.k,
        assignment.noise_count()
    );
    let topics = ctfidf(corpus, &assignment, cfg.top_n)?;
    let metadata = PipelineMetadata {
        config: *cfg,
        seed: cfg.seed,
        k: assignment.k,
        noise_fraction: assignment.noise_fraction(),
        n_docs: assignment.labels.len(),
        explained_variance: reduced.explained_ratio(),
    };
    Ok(PipelineOutput {
        topics,
        assignment,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Three latent groups; each group's docs use their own words and their
    /// embeddings sit near a group-specific center.
    fn synthetic(n_per: usize, seed: u64) -> (BowCorpus, EmbeddingMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let groups = [["apple", "pear", "plum"], ["car", "road", "wheel"], ["star", "moon", "orbit"]];
        let mut docs = Vec::new();
        let mut rows = Vec::new();
        for (g, words) in groups.iter().enumerate() {
            for _ in 0..n_per {
                let doc: Vec<String> = (0..8).map(|_| words[rng.gen_range(0..3)].to_string()).collect();
                docs.push(doc);
                rows.push((0..12).map(|d| if d % 3 == g { 5.0 } else { 0.0 } + rng.gen_range(-0.3..0.3)).collect::<Vec<f64>>());
            }
        }
        (BowCorpus::from_tokens(&docs).unwrap(), EmbeddingMatrix::from_rows(&rows).unwrap())
    }

    #[test]
    fn kmeans_backend_gives_exactly_k_topics() {
        let (c, x) = synthetic(20, 1);
        let cfg = PipelineConfig {
            clusterer: Clusterer::KMeans { k: 5, max_iters: 100 },
            ..Default::default()
        };
        let out = run_pipeline(&c, &x, &cfg).unwrap();
        assert_eq!(out.topics.len(), 5);
        assert_eq!(out.metadata.k, 5);
        assert_eq!(out.metadata.noise_fraction, 0.0);
    }

    #[test]
    fn hdbscan_backend_recovers_groups() {
        let (c, x) = synthetic(30, 2);
        let out = run_pipeline(&c, &x, &PipelineConfig::default()).unwrap();
        assert_eq!(out.metadata.k, 3);
        for t in &out.topics.topics {
            let mut words: Vec<&str> = t.words.iter().map(|&w| c.vocab.token(w).unwrap()).collect();
            words.sort();
            assert!(
                [vec!["apple", "pear", "plum"], vec!["car", "road", "wheel"], vec!["moon", "orbit", "star"]]
                    .contains(&words),
                "{words:?}"
            );
        }
    }

    #[test]
    fn deterministic() {
        let (c, x) = synthetic(25, 3);
        let cfg = PipelineConfig::default();
        assert_eq!(run_pipeline(&c, &x, &cfg).unwrap(), run_pipeline(&c, &x, &cfg).unwrap());
    }

    #[test]
    fn misaligned_inputs() {
        let (c, x) = synthetic(10, 4);
        let shorter = EmbeddingMatrix::from_rows(&x.rows().take(29).map(<[f64]>::to_vec).collect::<Vec<_>>()).unwrap();
        assert!(matches!(
            run_pipeline(&c, &shorter, &PipelineConfig::default()),
            Err(EmbedError::MisalignedInputs(_))
        ));
        let renamed = c.clone().with_doc_ids((0..30).map(|i| format!("d{i}")).collect()).unwrap();
        assert!(matches!(
            run_pipeline(&renamed, &x, &PipelineConfig::default()),
            Err(EmbedError::MisalignedInputs(_))
        ));
    }
}
