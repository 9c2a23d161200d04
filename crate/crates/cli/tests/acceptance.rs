//! End-to-end acceptance checks. Runs as a plain binary (no libtest harness)
//! so every criterion prints one PASS/FAIL line even when all pass.

mod common;

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topiceval_cli::archive::CorpusArchive;
use topiceval_cli::evaluate::{evaluate_pipeline, EvalSettings};
use topiceval_cli::loaders::{load_documents, LoadOptions};
use topiceval_cli::records::read_records;
use topiceval_cli::report::summarize;
use topiceval_cli::sweep::{run_sweep, SweepOptions};
use topiceval_core::classic::{lda_fit, lda_phi, nmf_fit, NmfConfig};
use topiceval_core::coherence::{npmi_from_counts, score_topics, Topic};
use topiceval_core::divergence::{cosine_distance, hellinger, jsd};
use topiceval_core::embed::{load_embeddings, write_embeddings, CtfidfModel, PipelineConfig};
use topiceval_core::textprep::bow_from_ids;
use topiceval_core::{
    BowCorpus, ClusterAssignment, CoherenceConfig, CoherenceMeasure, EmbeddingMatrix, LdaConfig, TokenizerConfig,
    Vocabulary,
};

// ---- pinned tolerances and limits -------------------------------------------

const ORACLE_REL_TOL: f64 = 1e-9;
const ORACLE_TIME: Duration = Duration::from_secs(5);
const EXACT_TOL: f64 = 1e-12;
const NPMI_SPOT: (f64, f64) = (0.33678, 1e-5);
const JSD_SPOT: (f64, f64) = (0.5, 1e-12);
const HELLINGER_SPOT: (f64, f64) = (0.32493, 1e-5);
const CTFIDF_SPOT: (f64, f64) = (2.5419, 1e-4);
const LDA_L1: f64 = 0.1;
const LDA_TIME: Duration = Duration::from_secs(30);
const NMF_REL_ERR: f64 = 1e-3;
const NMF_MONOTONE_TOL: f64 = 1e-10;
const PIPELINE_MIN_TOPICS: usize = 10;
const PIPELINE_CV: (f64, f64) = (0.35, 0.90);
const PIPELINE_MIN_DIVERSITY: f64 = 0.85;
const PIPELINE_TIME: Duration = Duration::from_secs(60);
const L6_MEAN: (f64, f64) = (0.6262, 1e-4);
const ENCODER_SPREAD: f64 = 0.04;

struct Outcome {
    pass: bool,
    detail: String,
    /// A failing sub-check whose pinned value contradicts direct evaluation;
    /// reported but not fatal.
    known_conflict: Option<String>,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        known_conflict: None,
    }
}

fn within(x: f64, (target, tol): (f64, f64)) -> bool {
    (x - target).abs() <= tol
}

// ---- 1: coherence against brute force ---------------------------------------

/// Every virtual document as an explicit set; counts by linear scan.
struct BruteForce(Vec<HashSet<u32>>);

impl BruteForce {
    fn new(docs: &[Vec<u32>], window: Option<usize>) -> Self {
        let mut sets = Vec::new();
        for d in docs {
            match window {
                Some(s) if d.len() > s => {
                    for i in 0..=d.len() - s {
                        sets.push(d[i..i + s].iter().copied().collect());
                    }
                }
                _ => sets.push(d.iter().copied().collect()),
            }
        }
        Self(sets)
    }

    fn n(&self, ws: &[u32]) -> f64 {
        self.0.iter().filter(|s| ws.iter().all(|w| s.contains(w))).count() as f64
    }

    fn npmi(&self, a: u32, b: u32) -> f64 {
        if a == b {
            return 1.0;
        }
        let total = self.0.len() as f64;
        let pab = self.n(&[a, b]) / total;
        if pab == 0.0 {
            return -1.0;
        }
        if pab == 1.0 {
            return 1.0;
        }
        (pab / (self.n(&[a]) / total * (self.n(&[b]) / total))).ln() / -pab.ln()
    }

    fn pairs(t: &[u32]) -> Vec<(u32, u32)> {
        (0..t.len()).flat_map(|i| (i + 1..t.len()).map(move |j| (t[i], t[j]))).collect()
    }

    fn umass(&self, t: &[u32], eps: f64) -> f64 {
        let p = Self::pairs(t);
        p.iter().map(|&(a, b)| ((self.n(&[a, b]) + eps) / self.n(&[b])).ln()).sum::<f64>() / p.len() as f64
    }

    fn c_npmi(&self, t: &[u32]) -> f64 {
        let p = Self::pairs(t);
        p.iter().map(|&(a, b)| self.npmi(a, b)).sum::<f64>() / p.len() as f64
    }

    fn c_v(&self, t: &[u32]) -> f64 {
        let v: Vec<Vec<f64>> = t.iter().map(|&a| t.iter().map(|&b| self.npmi(a, b)).collect()).collect();
        let m = t.len() as f64;
        let mean: Vec<f64> = (0..t.len()).map(|j| v.iter().map(|r| r[j]).sum::<f64>() / m).collect();
        let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter()
            .map(|r| r.iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>() / (norm(r) * norm(&mean)))
            .sum::<f64>()
            / m
    }
}

fn criterion_1() -> Outcome {
    let vocab = 300u32;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let docs: Vec<Vec<u32>> = (0..200)
        .map(|_| {
            let theme = rng.gen_range(0..5u32);
            (0..rng.gen_range(10..150))
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        theme * 60 + rng.gen_range(0..60)
                    } else {
                        rng.gen_range(0..vocab)
                    }
                })
                .collect()
        })
        .collect();
    let mut df = vec![0u64; vocab as usize];
    for d in &docs {
        for &(w, _) in &bow_from_ids(d) {
            df[w as usize] += 1;
        }
    }
    let corpus = BowCorpus {
        vocab: Vocabulary::from_parts((0..vocab).map(|i| format!("w{i:03}")).collect(), df, 200),
        docs: docs.iter().map(|d| bow_from_ids(d)).collect(),
        doc_ids: (0..200).map(|i| i.to_string()).collect(),
    };
    let topics: Vec<Topic> = (0..10)
        .map(|t| {
            let mut ws = Vec::new();
            while ws.len() < 10 {
                let w = if rng.gen_bool(0.7) { (t % 5) * 60 + rng.gen_range(0..60) } else { rng.gen_range(0..vocab) };
                if !ws.contains(&w) && corpus.vocab.doc_freq(w) > 0 {
                    ws.push(w);
                }
            }
            Topic::new(ws).unwrap()
        })
        .collect();

    let mut worst = 0.0f64;
    let mut elapsed = Duration::ZERO;
    for measure in [CoherenceMeasure::Umass, CoherenceMeasure::CNpmi, CoherenceMeasure::CV] {
        let cfg = CoherenceConfig::new(measure);
        let start = Instant::now();
        let got = score_topics(&topics, &corpus, &docs, &cfg).unwrap();
        elapsed += start.elapsed();
        let brute = match measure {
            CoherenceMeasure::Umass => BruteForce::new(&docs, None),
            _ => BruteForce::new(&docs, Some(cfg.window_size)),
        };
        for (t, g) in topics.iter().zip(&got) {
            let want = match measure {
                CoherenceMeasure::Umass => brute.umass(t.words(), cfg.epsilon),
                CoherenceMeasure::CNpmi => brute.c_npmi(t.words()),
                CoherenceMeasure::CV => brute.c_v(t.words()),
            };
            worst = worst.max((g - want).abs() / want.abs().max(f64::MIN_POSITIVE));
        }
    }
    outcome(
        worst <= ORACLE_REL_TOL && elapsed < ORACLE_TIME,
        format!("max relative error {worst:.2e} over UMass/C_NPMI/C_v, library time {elapsed:.2?}"),
    )
}

// ---- 2: bounds --------------------------------------------------------------

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() }).collect();
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut npmi_ok = true;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..10_000u64);
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        let j = rng.gen_range(0..=a.min(b));
        let v = npmi_from_counts(j, a, b, n);
        npmi_ok &= (-1.0..=1.0).contains(&v);
    }
    let mut div_ok = true;
    for _ in 0..1_000 {
        let n = rng.gen_range(2..50);
        let (p, q) = (random_dist(&mut rng, n), random_dist(&mut rng, n));
        for v in [jsd(&p, &q), hellinger(&p, &q), cosine_distance(&p, &q)] {
            div_ok &= (0.0..=1.0).contains(&v.unwrap());
        }
    }
    let mut edge_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(2..50);
        let p = random_dist(&mut rng, n);
        let (x, y) = (vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, 0.25, 0.75]);
        for f in [jsd, hellinger, cosine_distance] {
            edge_ok &= f(&p, &p).unwrap().abs() <= EXACT_TOL;
            edge_ok &= (f(&x, &y).unwrap() - 1.0).abs() <= EXACT_TOL;
        }
    }
    outcome(
        npmi_ok && div_ok && edge_ok,
        format!("NPMI in [-1,1]: {npmi_ok}; JSD/Hellinger/cosine in [0,1]: {div_ok}; identical=0 & disjoint=1: {edge_ok}"),
    )
}

// ---- 3: spot values ---------------------------------------------------------

fn criterion_3() -> Outcome {
    let npmi = npmi_from_counts(3, 5, 4, 10);
    let js = jsd(&[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5]).unwrap();
    let he = hellinger(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
    // 0 apple, 1 pear, 2 car, 3 road; cluster 0 = two fruit documents
    let corpus = BowCorpus {
        vocab: Vocabulary::from_parts(
            ["apple", "pear", "car", "road"].map(String::from).to_vec(),
            vec![2, 1, 1, 1],
            3,
        ),
        docs: vec![vec![(0, 2), (1, 1)], vec![(0, 1)], vec![(2, 2), (3, 2)]],
        doc_ids: vec!["0".into(), "1".into(), "2".into()],
    };
    let assignment = ClusterAssignment { labels: vec![0, 0, 1], k: 2 };
    let w = CtfidfModel::fit(&corpus, &assignment).unwrap().weights[0][0];

    let (n_ok, j_ok, h_ok, w_ok) = (within(npmi, NPMI_SPOT), within(js, JSD_SPOT), within(he, HELLINGER_SPOT), within(w, CTFIDF_SPOT));
    // Hellinger oracle: sqrt(1 - sum sqrt(p q)) evaluated independently
    let direct = (1.0 - ((0.5f64 * 0.9).sqrt() + (0.5f64 * 0.1).sqrt())).sqrt();
    let conflict = (!h_ok && (he - direct).abs() <= EXACT_TOL).then(|| {
        format!(
            "Hellinger: pinned {} ± {:.0e} but direct evaluation of sqrt(1 - BC) gives {direct:.7} (|Δ| = {:.2e}); \
             the implementation matches the direct value",
            HELLINGER_SPOT.0,
            HELLINGER_SPOT.1,
            (direct - HELLINGER_SPOT.0).abs()
        )
    });
    Outcome {
        pass: n_ok && j_ok && h_ok && w_ok,
        detail: format!(
            "NPMI {npmi:.6} [{}], JSD {js} [{}], Hellinger {he:.7} [{}], c-TF-IDF W(apple) {w:.6} [{}]",
            ok(n_ok),
            ok(j_ok),
            ok(h_ok),
            ok(w_ok)
        ),
        known_conflict: if n_ok && j_ok && w_ok { conflict } else { None },
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "off"
    }
}

// ---- 4: LDA recovery --------------------------------------------------------

fn criterion_4() -> Outcome {
    let (n_docs, half, len) = (500, 20, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let docs: Vec<Vec<(u32, u64)>> = (0..n_docs)
        .map(|d| {
            let base = (d % 2 * half) as u32;
            bow_from_ids(&(0..len).map(|_| base + rng.gen_range(0..half as u32)).collect::<Vec<_>>())
        })
        .collect();
    let mut df = vec![0u64; 2 * half];
    for d in &docs {
        for &(w, _) in d {
            df[w as usize] += 1;
        }
    }
    let corpus = BowCorpus {
        vocab: Vocabulary::from_parts((0..2 * half).map(|i| format!("w{i:02}")).collect(), df, n_docs as u64),
        docs,
        doc_ids: (0..n_docs).map(|i| i.to_string()).collect(),
    };

    let cfg = LdaConfig {
        sweeps: 500,
        seed: 4,
        ..LdaConfig::new(2)
    };
    let start = Instant::now();
    let phi = lda_phi(&lda_fit(&corpus, &cfg).unwrap(), cfg.beta);
    let elapsed = start.elapsed();
    let truth = |t: usize, w: usize| if w / half == t { 1.0 / half as f64 } else { 0.0 };
    let l1 = |k: usize, t: usize| (0..2 * half).map(|w| (phi[k].as_slice()[w] - truth(t, w)).abs()).sum::<f64>();
    let matched = ((l1(0, 0) + l1(1, 1)) / 2.0).min((l1(0, 1) + l1(1, 0)) / 2.0);

    let one = LdaConfig {
        sweeps: 3,
        ..LdaConfig::new(1)
    };
    let phi1 = lda_phi(&lda_fit(&corpus, &one).unwrap(), one.beta);
    let totals = corpus.term_totals();
    let n: u64 = totals.iter().sum();
    let v = corpus.vocab.len() as f64;
    let closed = totals
        .iter()
        .enumerate()
        .all(|(w, &c)| phi1[0].as_slice()[w] == (c as f64 + one.beta) / (n as f64 + v * one.beta));

    outcome(
        matched < LDA_L1 && closed && elapsed < LDA_TIME,
        format!("matched mean L1 {matched:.4}, K=1 closed form exact: {closed}, 500 sweeps in {elapsed:.2?}"),
    )
}

// ---- 5: NMF -----------------------------------------------------------------

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = DMatrix::from_fn(50, 2, |_, _| rng.gen_range(0.0..1.0));
    let h = DMatrix::from_fn(2, 40, |_, _| rng.gen_range(0.0..1.0));
    let v = &w * &h;
    let f = nmf_fit(
        &v,
        &NmfConfig {
            iters: 2000,
            tol: 0.0,
            ..NmfConfig::new(2)
        },
    )
    .unwrap();
    let err = f.relative_error(&v);
    let monotone = f.objective_trace.windows(2).all(|p| p[1] <= p[0] + NMF_MONOTONE_TOL);
    outcome(
        err < NMF_REL_ERR && monotone,
        format!("relative Frobenius error {err:.2e} after {} iterations, monotone: {monotone}", f.objective_trace.len()),
    )
}

// ---- 6: pipeline on the fixture ---------------------------------------------

fn criterion_6(root: &Path) -> Outcome {
    let start = Instant::now();
    let docs = load_documents(&root.join("20ng_subset/docs.jsonl"), None, &LoadOptions::default()).unwrap();
    let archive = CorpusArchive::build(&docs, &TokenizerConfig::default()).unwrap();
    let emb = load_embeddings(&root.join("20ng_subset/minilm-l6.emb")).unwrap();
    let (out, eval) = evaluate_pipeline(&archive, &emb, &PipelineConfig::default(), &EvalSettings::default()).unwrap();
    let elapsed = start.elapsed();
    let cv = eval.coherence.mean;
    outcome(
        out.topics.len() >= PIPELINE_MIN_TOPICS
            && (PIPELINE_CV.0..=PIPELINE_CV.1).contains(&cv)
            && eval.diversity >= PIPELINE_MIN_DIVERSITY
            && elapsed < PIPELINE_TIME,
        format!(
            "{} topics, C_v {cv:.4}, unique diversity {:.4}, noise {:.1}%, {elapsed:.2?}",
            out.topics.len(),
            eval.diversity,
            100.0 * out.metadata.noise_fraction
        ),
    )
}

// ---- 7: per-encoder report --------------------------------------------------

fn criterion_7(root: &Path) -> Outcome {
    let records = read_records(&root.join("table1_records.csv")).unwrap();
    let summary = summarize(&records).unwrap();
    let means: Vec<(String, f64)> = summary
        .encoders
        .iter()
        .map(|e| (e.encoder.clone(), e.coherence.unwrap().mean))
        .collect();
    let l6 = means.iter().find(|(n, _)| n == "all-MiniLM-L6-v2").map(|m| m.1).unwrap();
    let hi = means.iter().map(|m| m.1).fold(f64::MIN, f64::max);
    let lo = means.iter().map(|m| m.1).fold(f64::MAX, f64::min);
    outcome(
        within(l6, L6_MEAN) && hi - lo <= ENCODER_SPREAD,
        format!("L6 mean {l6:.5}; {} encoder means span {:.4} ({lo:.4}..{hi:.4})", means.len(), hi - lo),
    )
}

// ---- 8: sweep determinism ---------------------------------------------------

fn criterion_8(root: &Path) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("20ng_subset");
    fs::create_dir_all(&d).unwrap();
    let docs = load_documents(&root.join("20ng_subset/docs.jsonl"), None, &LoadOptions::default()).unwrap();
    CorpusArchive::build(&docs, &TokenizerConfig::default())
        .unwrap()
        .write(&d.join("corpus.arc"))
        .unwrap();
    let l6 = load_embeddings(&root.join("20ng_subset/minilm-l6.emb")).unwrap();
    // a second "encoder": a fixed random projection of the first
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p: Vec<f64> = (0..l6.dim() * 96).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut data = Vec::with_capacity(l6.n_docs() * 96);
    for i in 0..l6.n_docs() {
        let row = l6.row(i);
        for j in 0..96 {
            data.push(row.iter().enumerate().map(|(k, x)| x * p[k * 96 + j]).sum::<f64>());
        }
    }
    let proj = EmbeddingMatrix::new(l6.n_docs(), 96, data, l6.doc_ids().to_vec()).unwrap();
    write_embeddings(&d.join("projected.emb"), &proj).unwrap();
    common::write_dataset(dir.path(), "synthetic", 300, 3, &[("minilm-l6", 30), ("projected", 31)]);
    let l6_path = root.join("20ng_subset/minilm-l6.emb");
    fs::copy(&l6_path, d.join("minilm-l6.emb")).unwrap();
    fs::copy(root.join("20ng_subset/minilm-l6.ids.jsonl"), d.join("minilm-l6.ids.jsonl")).unwrap();
    let cfg = common::sweep_config(dir.path(), &["20ng_subset", "synthetic"], &[("minilm-l6", "22M"), ("projected", "1M")], 4);
    // use the default density-based clusterer for this run
    let text = fs::read_to_string(&cfg).unwrap().replace("clusterer = \"kmeans\"\nk = 4\nreduce_dim = 4\n", "");
    fs::write(&cfg, text).unwrap();

    let opts = SweepOptions {
        default_seed: 42,
        ..SweepOptions::default()
    };
    let (a, b) = (dir.path().join("run-a.csv"), dir.path().join("run-b.csv"));
    let ra = run_sweep(&cfg, &a, &opts).unwrap();
    run_sweep(&cfg, &b, &opts).unwrap();
    let (ba, bb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    outcome(
        ba == bb && ra.records.len() == 4,
        format!("{} records, {} bytes each, identical: {}", ra.records.len(), ba.len(), ba == bb),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let root = common::fixtures();
    let criteria: Vec<Criterion> = vec![
        ("coherence matches brute force", Box::new(criterion_1)),
        ("NPMI and divergence bounds", Box::new(criterion_2)),
        ("spot values", Box::new(criterion_3)),
        ("LDA planted recovery", Box::new(criterion_4)),
        ("NMF rank-2 factorization", Box::new(criterion_5)),
        ("embedding pipeline on fixture", Box::new(|| criterion_6(&root))),
        ("per-encoder report", Box::new(|| criterion_7(&root))),
        ("sweep determinism", Box::new(|| criterion_8(&root))),
    ];
    let mut fatal = 0;
    let mut conflicts = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {}: {} — {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        match (o.pass, o.known_conflict) {
            (true, _) => {}
            (false, Some(c)) => conflicts.push(format!("criterion {}: {c}", i + 1)),
            (false, None) => fatal += 1,
        }
    }
    for c in &conflicts {
        println!("note: {c}");
    }
    if fatal > 0 {
        println!("acceptance: {fatal} criterion/criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: no failures beyond {} documented value conflict(s)", conflicts.len());
}
