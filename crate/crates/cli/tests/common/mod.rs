//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use topiceval_cli::archive::CorpusArchive;
use topiceval_cli::loaders::RawDoc;
use topiceval_core::embed::write_embeddings;
use topiceval_core::{EmbeddingMatrix, TokenizerConfig};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn topiceval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topiceval"))
        .args(args)
        .env_remove("TOPICEVAL_SEED")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const THEMES: [&[&str]; 4] = [
    &["engine", "wheel", "brake", "tire", "driver", "highway", "fuel", "garage"],
    &["orbit", "rocket", "launch", "moon", "planet", "shuttle", "station", "telescope"],
    &["pitcher", "inning", "catcher", "league", "batting", "stadium", "season", "umpire"],
    &["doctor", "patient", "clinic", "therapy", "symptom", "disease", "nurse", "vaccine"],
];
const FILLER: &[&str] = &["people", "think", "today", "really", "question", "answer", "thing", "place"];

/// `n` short documents, each mostly about one of four themes, plus matching
/// embeddings (theme direction + seeded noise, encoder-specific).
pub fn synthetic(n: usize, seed: u64) -> (Vec<RawDoc>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(n);
    let mut themes = Vec::with_capacity(n);
    for i in 0..n {
        let t = i % THEMES.len();
        let words: Vec<&str> = (0..rng.gen_range(12..30))
            .map(|_| {
                if rng.gen_bool(0.7) {
                    THEMES[t][rng.gen_range(0..THEMES[t].len())]
                } else {
                    FILLER[rng.gen_range(0..FILLER.len())]
                }
            })
            .collect();
        docs.push(RawDoc {
            id: format!("doc-{i:04}"),
            text: words.join(" "),
        });
        themes.push(t);
    }
    (docs, themes)
}

pub fn embeddings(docs: &[RawDoc], themes: &[usize], dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.15).unwrap();
    let mut data = Vec::with_capacity(docs.len() * dim);
    for &t in themes {
        for j in 0..dim {
            let anchor = if j % THEMES.len() == t { 1.0 } else { 0.0 };
            data.push(anchor + noise.sample(&mut rng));
        }
    }
    EmbeddingMatrix::new(docs.len(), dim, data, docs.iter().map(|d| d.id.clone()).collect()).unwrap()
}

/// Write `<dir>/<name>/corpus.arc` and one embedding file per encoder seed.
pub fn write_dataset(dir: &Path, name: &str, n: usize, seed: u64, encoders: &[(&str, u64)]) {
    let d = dir.join(name);
    std::fs::create_dir_all(&d).unwrap();
    let (docs, themes) = synthetic(n, seed);
    CorpusArchive::build(&docs, &TokenizerConfig::default())
        .unwrap()
        .write(&d.join("corpus.arc"))
        .unwrap();
    for (enc, s) in encoders {
        write_embeddings(&d.join(format!("{enc}.emb")), &embeddings(&docs, &themes, 16, *s)).unwrap();
    }
}

/// Sweep config over `datasets` × `encoders` rooted at `dir`.
pub fn sweep_config(dir: &Path, datasets: &[&str], encoders: &[(&str, &str)], jobs: usize) -> PathBuf {
    let mut s = format!(
        "seed = 7\ntimestamp = \"t0\"\njobs = {jobs}\n\n[pipeline]\nclusterer = \"kmeans\"\nk = 4\nreduce_dim = 4\n\n"
    );
    for d in datasets {
        s.push_str(&format!("[[dataset]]\nname = \"{d}\"\ncorpus = \"{d}/corpus.arc\"\n\n"));
    }
    for (e, params) in encoders {
        s.push_str(&format!(
            "[[encoder]]\nname = \"{e}\"\nparams = \"{params}\"\nembeddings = \"{{dataset}}/{e}.emb\"\n\n"
        ));
    }
    let p = dir.join("sweep.toml");
    std::fs::write(&p, s).unwrap();
    p
}
