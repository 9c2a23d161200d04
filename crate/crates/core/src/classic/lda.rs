use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{top_indices, ModelError};
use crate::divergence::TopicWordDist;
use crate::textprep::BowCorpus;
use crate::topics::{TopicEntry, TopicSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50 / k`, `beta = 0.01`, 1000 sweeps.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            sweeps: 1000,
            seed: crate::DEFAULT_SEED,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.k == 0 {
            return Err(ModelError::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.alpha > 0.0) || !(self.beta > 0.0) {
            return Err(ModelError::InvalidConfig("alpha and beta must be positive".into()));
        }
        if self.sweeps == 0 {
            return Err(ModelError::InvalidConfig("sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Topic assignments and the count tables they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaState {
    k: usize,
    vocab_size: usize,
    /// Token `i` of document `d` lives at `doc_offsets[d] + i`.
    doc_offsets: Vec<usize>,
    words: Vec<u32>,
    z: Vec<u32>,
    n_dk: Vec<u32>,
    n_kw: Vec<u32>,
    n_k: Vec<u64>,
}

impl LdaState {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn n_docs(&self) -> usize {
        self.doc_offsets.len() - 1
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.doc_offsets[d + 1] - self.doc_offsets[d]
    }

    /// Topic assignments of document `d`, in token order.
    pub fn assignments(&self, d: usize) -> &[u32] {
        &self.z[self.doc_offsets[d]..self.doc_offsets[d + 1]]
    }

    pub fn n_dk(&self, d: usize, k: usize) -> u32 {
        self.n_dk[d * self.k + k]
    }

    pub fn n_kw(&self, k: usize, w: usize) -> u32 {
        self.n_kw[k * self.vocab_size + w]
    }

    pub fn n_k(&self, k: usize) -> u64 {
        self.n_k[k]
    }

    /// Verify the count tables agree with the assignments.
    pub fn check_invariants(&self) -> bool {
        let (k, v) = (self.k, self.vocab_size);
        let mut n_dk = vec![0u32; self.n_docs() * k];
        let mut n_kw = vec![0u32; k * v];
        let mut n_k = vec![0u64; k];
        for d in 0..self.n_docs() {
            for i in self.doc_offsets[d]..self.doc_offsets[d + 1] {
                let t = self.z[i] as usize;
                n_dk[d * k + t] += 1;
                n_kw[t * v + self.words[i] as usize] += 1;
                n_k[t] += 1;
            }
        }
        let docs_ok = (0..self.n_docs())
            .all(|d| (0..k).map(|t| self.n_dk(d, t) as usize).sum::<usize>() == self.doc_len(d));
        let topics_ok = (0..k).all(|t| (0..v).map(|w| self.n_kw(t, w) as u64).sum::<u64>() == self.n_k[t]);
        docs_ok && topics_ok && n_dk == self.n_dk && n_kw == self.n_kw && n_k == self.n_k
    }
}

/// A Gibbs chain: state plus its generator, advanced one sweep at a time.
pub struct LdaSampler {
    state: LdaState,
    alpha: f64,
    beta: f64,
    rng: ChaCha8Rng,
    probs: Vec<f64>,
}

impl LdaSampler {
    pub fn new(corpus: &BowCorpus, cfg: &LdaConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        if corpus.docs.is_empty() {
            return Err(ModelError::EmptyCorpus);
        }
        let k = cfg.k;
        let vocab_size = corpus.vocab.len();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let mut doc_offsets = Vec::with_capacity(corpus.docs.len() + 1);
        let mut words = Vec::new();
        doc_offsets.push(0);
        for (d, doc) in corpus.docs.iter().enumerate() {
            if doc.is_empty() {
                return Err(ModelError::EmptyDocument(d));
            }
            for &(id, c) in doc {
                words.extend(std::iter::repeat_n(id, c as usize));
            }
            doc_offsets.push(words.len());
        }

        let mut state = LdaState {
            k,
            vocab_size,
            doc_offsets,
            z: Vec::with_capacity(words.len()),
            words,
            n_dk: vec![0; corpus.docs.len() * k],
            n_kw: vec![0; k * vocab_size],
            n_k: vec![0; k],
        };
        for d in 0..state.n_docs() {
            for i in state.doc_offsets[d]..state.doc_offsets[d + 1] {
                let t = rng.gen_range(0..k);
                state.z.push(t as u32);
                state.n_dk[d * k + t] += 1;
                state.n_kw[t * vocab_size + state.words[i] as usize] += 1;
                state.n_k[t] += 1;
            }
        }
        Ok(Self {
            state,
            alpha: cfg.alpha,
            beta: cfg.beta,
            rng,
            probs: vec![0.0; k],
        })
    }

    /// Resample every token once, in document order.
    pub fn sweep(&mut self) {
        let s = &mut self.state;
        let (k, v) = (s.k, s.vocab_size);
        let v_beta = v as f64 * self.beta;
        for d in 0..s.doc_offsets.len() - 1 {
            for i in s.doc_offsets[d]..s.doc_offsets[d + 1] {
                let w = s.words[i] as usize;
                let old = s.z[i] as usize;
                s.n_dk[d * k + old] -= 1;
                s.n_kw[old * v + w] -= 1;
                s.n_k[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (s.n_dk[d * k + t] as f64 + self.alpha)
                        * (s.n_kw[t * v + w] as f64 + self.beta)
                        / (s.n_k[t] as f64 + v_beta);
                    total += p;
                    self.probs[t] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self.probs.iter().position(|&c| u < c).unwrap_or(k - 1);

                s.z[i] = new as u32;
                s.n_dk[d * k + new] += 1;
                s.n_kw[new * v + w] += 1;
                s.n_k[new] += 1;
            }
        }
    }

    pub fn state(&self) -> &LdaState {
        &self.state
    }

    pub fn into_state(self) -> LdaState {
        self.state
    }
}

/// Run `cfg.sweeps` collapsed Gibbs sweeps. Deterministic for a given seed.
pub fn lda_fit(corpus: &BowCorpus, cfg: &LdaConfig) -> Result<LdaState, ModelError> {
    let mut sampler = LdaSampler::new(corpus, cfg)?;
    for _ in 0..cfg.sweeps {
        sampler.sweep();
    }
    Ok(sampler.into_state())
}

/// Posterior-mean topic-word distributions `(n_kw + β) / (n_k + Vβ)`.
pub fn lda_phi(state: &LdaState, beta: f64) -> Vec<TopicWordDist> {
    let v = state.vocab_size;
    (0..state.k)
        .map(|t| {
            let denom = state.n_k[t] as f64 + v as f64 * beta;
            let row = (0..v)
                .map(|w| (state.n_kw(t, w) as f64 + beta) / denom)
                .collect::<Vec<_>>();
            TopicWordDist::new(row).expect("posterior mean rows sum to one")
        })
        .collect()
}

/// Posterior-mean document-topic proportions `(n_dk + α) / (len_d + Kα)`.
pub fn lda_theta(state: &LdaState, alpha: f64) -> Vec<Vec<f64>> {
    let k = state.k;
    (0..state.n_docs())
        .map(|d| {
            let denom = state.doc_len(d) as f64 + k as f64 * alpha;
            (0..k).map(|t| (state.n_dk(d, t) as f64 + alpha) / denom).collect()
        })
        .collect()
}

/// Topics with their top-`top_n` words and full distributions.
pub fn lda_topic_set(state: &LdaState, beta: f64, top_n: usize) -> TopicSet {
    let topics = lda_phi(state, beta)
        .into_iter()
        .enumerate()
        .map(|(t, phi)| {
            let words = top_indices(phi.as_slice(), top_n);
            let weights = words.iter().map(|&w| phi.as_slice()[w as usize]).collect();
            TopicEntry {
                label: t as i64,
                words,
                weights,
                distribution: Some(phi),
            }
        })
        .collect();
    TopicSet::new(topics)
}
