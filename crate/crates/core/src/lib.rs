//! Topic-model quality toolkit.
//!
//! The crate is organised around the measurement pipeline:
//!
//! * [`textprep`] turns raw text into tokens, a [`Vocabulary`] and a [`BowCorpus`].
//! * [`cooccur`] counts word occurrence over whole documents or sliding windows.
//! * [`coherence`] scores topics with C_UMass, C_NPMI and C_v.
//! * [`divergence`] measures how distinct topics are from one another.
//! * [`classic`] holds the LDA (collapsed Gibbs) and NMF baselines.
//! * [`embed`] runs the embedding → reduction → clustering → c-TF-IDF pipeline.

pub mod classic;
pub mod coherence;
pub mod cooccur;
pub mod divergence;
pub mod embed;
pub mod textprep;
pub mod topics;

pub use classic::{LdaConfig, LdaState, NmfFactors};
pub use coherence::{CoherenceConfig, CoherenceMeasure, Topic};
pub use cooccur::{CooccurrenceStats, CountMode};
pub use divergence::{DivergenceMeasure, DivergenceReport, TopicWordDist};
pub use embed::{ClusterAssignment, EmbeddingMatrix};
pub use textprep::{BowCorpus, TokenizerConfig, Vocabulary};
pub use topics::{TopicEntry, TopicSet};

/// Default seed used by the command-line tools when none is given.
pub const DEFAULT_SEED: u64 = 42;
