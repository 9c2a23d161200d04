//! Seeded synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topiceval_core::textprep::{bow_from_ids, BowCorpus, Vocabulary};
use topiceval_core::EmbeddingMatrix;

/// `n_docs` token-id sequences over `vocab` ids with a Zipf-like skew, each of
/// length `len`.
pub fn sequences(n_docs: usize, len: usize, vocab: u32, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_docs)
        .map(|_| {
            (0..len)
                .map(|_| {
                    let u: f64 = rng.gen();
                    ((u * u * vocab as f64) as u32).min(vocab - 1)
                })
                .collect()
        })
        .collect()
}

/// Bag-of-words corpus over the same sequences, with placeholder tokens.
pub fn corpus(seqs: &[Vec<u32>], vocab: u32) -> BowCorpus {
    let docs: Vec<Vec<(u32, u64)>> = seqs.iter().map(|s| bow_from_ids(s)).collect();
    let mut df = vec![0u64; vocab as usize];
    for d in &docs {
        for &(w, _) in d {
            df[w as usize] += 1;
        }
    }
    let tokens = (0..vocab).map(|i| format!("w{i:06}")).collect();
    BowCorpus {
        vocab: Vocabulary::from_parts(tokens, df, docs.len() as u64),
        doc_ids: (0..docs.len()).map(|i| i.to_string()).collect(),
        docs,
    }
}

/// Gaussian blobs in `dim` dimensions.
pub fn blobs(n: usize, dim: usize, centers: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cs: Vec<Vec<f64>> = (0..centers)
        .map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| cs[i % centers].iter().map(|c| c + rng.gen_range(-1.0..1.0)).collect())
        .collect();
    EmbeddingMatrix::from_rows(&rows).expect("finite rows")
}
