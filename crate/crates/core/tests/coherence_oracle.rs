//! Coherence measures against a naive re-implementation that enumerates every
//! window as an explicit word set.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topiceval_core::coherence::{score_topics, Topic};
use topiceval_core::textprep::bow_from_ids;
use topiceval_core::{BowCorpus, CoherenceConfig, CoherenceMeasure, Vocabulary};

struct Naive {
    windows: Vec<HashSet<u32>>,
}

impl Naive {
    fn windows(docs: &[Vec<u32>], size: usize) -> Self {
        let mut windows = Vec::new();
        for d in docs {
            if d.len() <= size {
                windows.push(d.iter().copied().collect());
            } else {
                for s in 0..=d.len() - size {
                    windows.push(d[s..s + size].iter().copied().collect());
                }
            }
        }
        Self { windows }
    }

    fn documents(docs: &[Vec<u32>]) -> Self {
        Self {
            windows: docs.iter().map(|d| d.iter().copied().collect()).collect(),
        }
    }

    fn count(&self, ws: &[u32]) -> f64 {
        self.windows.iter().filter(|w| ws.iter().all(|x| w.contains(x))).count() as f64
    }

    fn npmi(&self, a: u32, b: u32) -> f64 {
        if a == b {
            return 1.0;
        }
        let n = self.windows.len() as f64;
        let j = self.count(&[a, b]);
        if j == 0.0 {
            return -1.0;
        }
        let pj = j / n;
        if pj == 1.0 {
            return 1.0;
        }
        let pa = self.count(&[a]) / n;
        let pb = self.count(&[b]) / n;
        (pj / (pa * pb)).ln() / -pj.ln()
    }

    fn umass(&self, t: &[u32], eps: f64) -> f64 {
        let mut s = Vec::new();
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                s.push(((self.count(&[t[i], t[j]]) + eps) / self.count(&[t[j]])).ln());
            }
        }
        s.iter().sum::<f64>() / s.len() as f64
    }

    fn c_npmi(&self, t: &[u32]) -> f64 {
        let mut s = Vec::new();
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                s.push(self.npmi(t[i], t[j]));
            }
        }
        s.iter().sum::<f64>() / s.len() as f64
    }

    fn c_v(&self, t: &[u32]) -> f64 {
        let vecs: Vec<Vec<f64>> = t.iter().map(|&a| t.iter().map(|&b| self.npmi(a, b)).collect()).collect();
        let mean: Vec<f64> = (0..t.len())
            .map(|c| vecs.iter().map(|v| v[c]).sum::<f64>() / t.len() as f64)
            .collect();
        let cos = |u: &[f64], v: &[f64]| {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot / (nu * nv)
        };
        vecs.iter().map(|v| cos(v, &mean)).sum::<f64>() / t.len() as f64
    }
}

fn random_corpus(seed: u64, n_docs: usize, vocab: usize) -> (BowCorpus, Vec<Vec<u32>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // a few themes make co-occurrence non-trivial
    let docs: Vec<Vec<u32>> = (0..n_docs)
        .map(|_| {
            let theme = rng.gen_range(0..4u32);
            let len = rng.gen_range(5..60);
            (0..len)
                .map(|_| {
                    if rng.gen_bool(0.6) {
                        theme * (vocab as u32 / 4) + rng.gen_range(0..vocab as u32 / 4)
                    } else {
                        rng.gen_range(0..vocab as u32)
                    }
                })
                .collect()
        })
        .collect();
    let tokens: Vec<String> = (0..vocab).map(|i| format!("w{i:04}")).collect();
    let mut df = vec![0u64; vocab];
    for d in &docs {
        let set: HashSet<u32> = d.iter().copied().collect();
        for w in set {
            df[w as usize] += 1;
        }
    }
    let corpus = BowCorpus {
        vocab: Vocabulary::from_parts(tokens, df, n_docs as u64),
        docs: docs.iter().map(|d| bow_from_ids(d)).collect(),
        doc_ids: (0..n_docs).map(|i| i.to_string()).collect(),
    };
    (corpus, docs)
}

fn topics(rng: &mut ChaCha8Rng, vocab: u32, docs: &[Vec<u32>]) -> Vec<Topic> {
    let present: HashSet<u32> = docs.iter().flatten().copied().collect();
    let mut present: Vec<u32> = present.into_iter().collect();
    present.sort_unstable();
    (0..6)
        .map(|_| {
            let mut ws: Vec<u32> = Vec::new();
            while ws.len() < 8 {
                let w = present[rng.gen_range(0..present.len())];
                if !ws.contains(&w) && w < vocab {
                    ws.push(w);
                }
            }
            Topic::new(ws).unwrap()
        })
        .collect()
}

fn assert_close(got: &[f64], want: &[f64], what: &str) {
    for (g, w) in got.iter().zip(want) {
        let rel = (g - w).abs() / w.abs().max(1e-300);
        assert!(rel <= 1e-9 || (g - w).abs() <= 1e-12, "{what}: {g} vs {w}");
    }
}

#[test]
fn all_measures_match_naive_enumeration() {
    let (corpus, docs) = random_corpus(7, 120, 160);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ts = topics(&mut rng, 160, &docs);

    let umass_cfg = CoherenceConfig::new(CoherenceMeasure::Umass);
    let got = score_topics(&ts, &corpus, &docs, &umass_cfg).unwrap();
    let naive = Naive::documents(&docs);
    let want: Vec<f64> = ts.iter().map(|t| naive.umass(t.words(), umass_cfg.epsilon)).collect();
    assert_close(&got, &want, "umass");

    for (measure, size) in [(CoherenceMeasure::CNpmi, 10), (CoherenceMeasure::CV, 25)] {
        let mut cfg = CoherenceConfig::new(measure);
        cfg.window_size = size;
        let got = score_topics(&ts, &corpus, &docs, &cfg).unwrap();
        let naive = Naive::windows(&docs, size);
        let want: Vec<f64> = ts
            .iter()
            .map(|t| match measure {
                CoherenceMeasure::CNpmi => naive.c_npmi(t.words()),
                _ => naive.c_v(t.words()),
            })
            .collect();
        assert_close(&got, &want, measure.name());
    }
}

#[test]
fn perfectly_co_occurring_words_score_one() {
    // every document holds both words, so every window does too
    let docs: Vec<Vec<u32>> = (0..20).map(|i| vec![0, 1, 2 + (i % 3)]).collect();
    let (corpus, _) = random_corpus(1, 1, 5);
    let corpus = BowCorpus {
        docs: docs.iter().map(|d| bow_from_ids(d)).collect(),
        doc_ids: (0..docs.len()).map(|i| i.to_string()).collect(),
        ..corpus
    };
    let t = vec![Topic::new(vec![0, 1]).unwrap()];
    for measure in [CoherenceMeasure::CNpmi, CoherenceMeasure::CV] {
        let got = score_topics(&t, &corpus, &docs, &CoherenceConfig::new(measure)).unwrap();
        assert!((got[0] - 1.0).abs() <= 1e-12, "{}: {}", measure.name(), got[0]);
    }
}
