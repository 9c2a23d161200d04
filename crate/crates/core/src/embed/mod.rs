//! Embedding-based topic extraction: load precomputed document embeddings,
//! reduce them with PCA, cluster (HDBSCAN or k-means), and describe each
//! cluster with c-TF-IDF.

mod ctfidf;
mod hdbscan;
mod io;
mod kmeans;
mod pca;
mod pipeline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ctfidf::{ctfidf, CtfidfModel};
pub use hdbscan::{hdbscan, HdbscanParams};
pub use io::{
    decode_embeddings, encode_embeddings, load_embeddings, row_bytes, sidecar_path, write_embeddings,
    EMB_HEADER_LEN, EMB_MAGIC, EMB_VERSION,
};
pub use kmeans::{kmeans, KMeansFit};
pub use pca::{reduce_pca, PcaProjection};
pub use pipeline::{run_pipeline, Clusterer, PipelineConfig, PipelineMetadata, PipelineOutput};

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("bad magic bytes {0:02X?}, expected \"EMB1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),
    #[error("file truncated: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: usize, actual: usize },
    #[error("{0} unexpected trailing bytes")]
    TrailingData(usize),
    #[error("payload checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("embedding matrix has no documents")]
    EmptyEmbeddings,
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("data length {len} does not match {n_docs} x {dim}")]
    ShapeMismatch { len: usize, n_docs: usize, dim: usize },
    #[error("sidecar has {ids} ids for {n_docs} rows")]
    SidecarMismatch { ids: usize, n_docs: usize },
    #[error("target dimension {target} is invalid for {dim}-dimensional input")]
    InvalidTargetDim { target: usize, dim: usize },
    #[error("covariance has rank {rank}, fewer than the requested {requested} components")]
    DegenerateCovariance { rank: usize, requested: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no non-noise clusters to describe")]
    NoClusters,
    #[error("inputs are misaligned: {0}")]
    MisalignedInputs(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed sidecar: {0}")]
    Sidecar(String),
}

impl From<std::io::Error> for EmbedError {
    fn from(e: std::io::Error) -> Self {
        EmbedError::Io(e.to_string())
    }
}

/// Dense document embeddings, row-major, one row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n_docs: usize,
    dim: usize,
    data: Vec<f64>,
    doc_ids: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(n_docs: usize, dim: usize, data: Vec<f64>, doc_ids: Vec<String>) -> Result<Self, EmbedError> {
        if n_docs == 0 {
            return Err(EmbedError::EmptyEmbeddings);
        }
        if dim == 0 {
            return Err(EmbedError::ZeroDimension);
        }
        if data.len() != n_docs * dim {
            return Err(EmbedError::ShapeMismatch {
                len: data.len(),
                n_docs,
                dim,
            });
        }
        if doc_ids.len() != n_docs {
            return Err(EmbedError::SidecarMismatch {
                ids: doc_ids.len(),
                n_docs,
            });
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(EmbedError::NonFiniteValue {
                row: i / dim,
                col: i % dim,
            });
        }
        Ok(Self {
            n_docs,
            dim,
            data,
            doc_ids,
        })
    }

    /// Rows with ids `"0".."n-1"`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, EmbedError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(EmbedError::ShapeMismatch {
                len: rows.iter().map(Vec::len).sum(),
                n_docs: rows.len(),
                dim,
            });
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(rows.len(), dim, rows.concat(), ids)
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Per-document cluster labels; `-1` marks noise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<i64>,
    /// Number of non-noise clusters; labels run over `0..k`.
    pub k: usize,
}

impl ClusterAssignment {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    pub fn noise_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            0.0
        } else {
            self.noise_count() as f64 / self.labels.len() as f64
        }
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    /// Relabel clusters in order of first appearance.
    pub(crate) fn canonical(labels: Vec<i64>) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels: Vec<i64> = labels
            .into_iter()
            .map(|l| {
                if l < 0 {
                    -1
                } else {
                    let next = map.len() as i64;
                    *map.entry(l).or_insert(next)
                }
            })
            .collect();
        Self { k: map.len(), labels }
    }
}
