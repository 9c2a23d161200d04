//! Dataset × encoder sweeps.
//!
//! The config is TOML:
//!
//! ```toml
//! seed = 42                # optional; falls back to TOPICEVAL_SEED, then 42
//! timestamp = "2025-01"    # optional label copied into every record
//! jobs = 4                 # worker threads
//! measure = "c_v"          # umass | c_npmi | c_v
//! window = 110             # optional, measure default otherwise
//! top_n = 10
//! diversity = "unique"     # unique | jsd | hellinger | cosine
//!
//! [pipeline]
//! reduce_dim = 5
//! clusterer = "hdbscan"    # or "kmeans" (then set k)
//! min_cluster_size = 10
//!
//! [[dataset]]
//! name = "20ng"
//! corpus = "20ng.corpus"   # archive written by `topiceval preprocess`
//!
//! [[encoder]]
//! name = "MiniLM-L6"
//! params = "22M"
//! embeddings = "emb/{dataset}/minilm-l6.emb"
//! ```
//!
//! Relative paths are resolved against the config file's directory. Every
//! finished job is appended to a JSON-lines journal; a rerun skips keys that
//! are already done, so an interrupted sweep resumes where it stopped. A
//! missing embedding file is logged as a gap and produces no record.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use topiceval_core::coherence::{CoherenceConfig, CoherenceMeasure};
use topiceval_core::embed::{load_embeddings, Clusterer, HdbscanParams, PipelineConfig};

use crate::archive::CorpusArchive;
use crate::error::{CliError, Result};
use crate::evaluate::{evaluate_pipeline, EvalSettings};
use crate::records::{parse_param_count, write_records, RunRecord};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ParamCount {
    Number(u64),
    Text(String),
}

impl ParamCount {
    fn resolve(&self) -> Result<u64> {
        match self {
            ParamCount::Number(0) => Err(CliError::Data("parameter count must be positive".into())),
            ParamCount::Number(n) => Ok(*n),
            ParamCount::Text(s) => parse_param_count(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderEntry {
    pub name: String,
    pub params: ParamCount,
    /// Path template; `{dataset}` is replaced by the dataset name.
    pub embeddings: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    pub reduce_dim: usize,
    pub clusterer: String,
    pub min_cluster_size: usize,
    pub min_samples: Option<usize>,
    pub k: Option<usize>,
    pub max_iters: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            reduce_dim: 5,
            clusterer: "hdbscan".into(),
            min_cluster_size: 10,
            min_samples: None,
            k: None,
            max_iters: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub timestamp: String,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_measure")]
    pub measure: String,
    pub window: Option<usize>,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default = "default_diversity")]
    pub diversity: String,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
    #[serde(rename = "encoder")]
    pub encoders: Vec<EncoderEntry>,
}

fn default_jobs() -> usize {
    1
}
fn default_measure() -> String {
    "c_v".into()
}
fn default_top_n() -> usize {
    10
}
fn default_diversity() -> String {
    "unique".into()
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        if cfg.datasets.is_empty() || cfg.encoders.is_empty() {
            return Err(CliError::Data("sweep config needs at least one [[dataset]] and one [[encoder]]".into()));
        }
        for (kind, names) in [
            ("dataset", cfg.datasets.iter().map(|d| &d.name).collect::<Vec<_>>()),
            ("encoder", cfg.encoders.iter().map(|e| &e.name).collect()),
        ] {
            let mut sorted = names.clone();
            sorted.sort();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(CliError::Data(format!("duplicate {kind} name '{}'", w[0])));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::unreadable(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    pub fn eval_settings(&self) -> Result<EvalSettings> {
        let measure: CoherenceMeasure = self.measure.parse().map_err(CliError::Data)?;
        let mut coherence = CoherenceConfig::new(measure);
        if let Some(w) = self.window {
            coherence.window_size = w;
        }
        coherence.top_n = self.top_n;
        Ok(EvalSettings {
            coherence,
            diversity: self.diversity.parse()?,
        })
    }

    pub fn pipeline_config(&self, seed: u64) -> Result<PipelineConfig> {
        let p = &self.pipeline;
        let clusterer = match p.clusterer.as_str() {
            "hdbscan" => Clusterer::Hdbscan(HdbscanParams {
                min_cluster_size: p.min_cluster_size,
                min_samples: p.min_samples,
            }),
            "kmeans" => Clusterer::KMeans {
                k: p.k.ok_or_else(|| CliError::Data("pipeline.k is required for the kmeans clusterer".into()))?,
                max_iters: p.max_iters,
            },
            other => return Err(CliError::Data(format!("unknown clusterer '{other}'"))),
        };
        Ok(PipelineConfig {
            reduce_dim: p.reduce_dim,
            clusterer,
            top_n: self.top_n,
            seed,
        })
    }
}

/// One entry of the sweep journal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub dataset: String,
    pub encoder: String,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<RunRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Done,
    MissingEmbeddings,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Override the config's worker count.
    pub jobs: Option<usize>,
    /// Journal path; defaults to `<out>.journal.jsonl`.
    pub journal: Option<PathBuf>,
    /// Stop after this many jobs finish in this run, leaving the sweep
    /// incomplete (used to exercise resumption).
    pub stop_after: Option<usize>,
    /// Seed used when the config has none.
    pub default_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Records of every completed job, sorted.
    pub records: Vec<RunRecord>,
    /// (dataset, encoder, path) of each missing embedding file.
    pub gaps: Vec<(String, String, PathBuf)>,
    pub ran_now: usize,
    pub resumed: usize,
    /// False when `stop_after` cut the run short; no CSV is written then.
    pub complete: bool,
}

struct Job {
    dataset: usize,
    encoder: usize,
    embeddings: PathBuf,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn journal_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".journal.jsonl");
    out.with_file_name(name)
}

fn read_journal(path: &Path) -> Result<HashMap<(String, String), JournalEntry>> {
    let mut done = HashMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let reader = BufReader::new(fs::File::open(path).map_err(|e| CliError::unreadable(path, e))?);
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // a torn final line from a crash mid-write is ignored
        match serde_json::from_str::<JournalEntry>(&line) {
            Ok(e) => {
                done.insert((e.dataset.clone(), e.encoder.clone()), e);
            }
            Err(err) => log::warn!("{} line {}: ignoring unreadable journal entry ({err})", path.display(), n + 1),
        }
    }
    Ok(done)
}

/// Run (or resume) the sweep described by the config at `config_path`,
/// writing the sorted record CSV to `out` once every job is done.
pub fn run_sweep(config_path: &Path, out: &Path, opts: &SweepOptions) -> Result<SweepOutcome> {
    let cfg = SweepConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("")).to_path_buf();
    let seed = cfg.seed.unwrap_or(opts.default_seed);
    let settings = cfg.eval_settings()?;
    let pipeline = cfg.pipeline_config(seed)?;
    let params: Vec<u64> = cfg.encoders.iter().map(|e| e.params.resolve()).collect::<Result<_>>()?;

    let journal_path = opts.journal.clone().unwrap_or_else(|| journal_path_for(out));
    let previous = read_journal(&journal_path)?;

    let mut jobs = Vec::new();
    let mut resumed = Vec::new();
    for (di, d) in cfg.datasets.iter().enumerate() {
        for (ei, e) in cfg.encoders.iter().enumerate() {
            let key = (d.name.clone(), e.name.clone());
            match previous.get(&key) {
                Some(entry) if entry.status == JobStatus::Done && entry.record.is_some() => {
                    resumed.push(entry.record.clone().expect("checked"));
                }
                _ => jobs.push(Job {
                    dataset: di,
                    encoder: ei,
                    embeddings: resolve(&base, Path::new(&e.embeddings.replace("{dataset}", &d.name))),
                }),
            }
        }
    }
    log::info!("sweep: {} job(s) to run, {} already done", jobs.len(), resumed.len());

    if let Some(dir) = journal_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let journal = Mutex::new(
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(|e| CliError::unreadable(&journal_path, e))?,
    );

    // corpora are loaded once, on first use
    let corpora: Vec<OnceLock<std::result::Result<Arc<CorpusArchive>, String>>> =
        cfg.datasets.iter().map(|_| OnceLock::new()).collect();
    let corpus_for = |i: usize| -> Result<Arc<CorpusArchive>> {
        corpora[i]
            .get_or_init(|| {
                CorpusArchive::read(&resolve(&base, &cfg.datasets[i].corpus))
                    .map(Arc::new)
                    .map_err(|e| e.to_string())
            })
            .clone()
            .map_err(CliError::Data)
    };

    let finished = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(cfg.jobs).max(1))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;

    let results: Vec<Result<Option<JournalEntry>>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                if opts.stop_after.is_some_and(|n| finished.load(Ordering::SeqCst) >= n) {
                    return Ok(None);
                }
                let d = &cfg.datasets[job.dataset];
                let e = &cfg.encoders[job.encoder];
                let started = Instant::now();
                let entry = if !job.embeddings.exists() {
                    log::warn!("gap: ({}, {}) has no embedding file at {}", d.name, e.name, job.embeddings.display());
                    JournalEntry {
                        dataset: d.name.clone(),
                        encoder: e.name.clone(),
                        status: JobStatus::MissingEmbeddings,
                        record: None,
                        detail: Some(job.embeddings.display().to_string()),
                        wall_ms: 0,
                    }
                } else {
                    let archive = corpus_for(job.dataset)?;
                    let emb = load_embeddings(&job.embeddings)
                        .map_err(|err| CliError::Data(format!("{}: {err}", job.embeddings.display())))?;
                    let (_, eval) = evaluate_pipeline(&archive, &emb, &pipeline, &settings)
                        .map_err(|err| CliError::Data(format!("({}, {}): {err}", d.name, e.name)))?;
                    JournalEntry {
                        dataset: d.name.clone(),
                        encoder: e.name.clone(),
                        status: JobStatus::Done,
                        record: Some(RunRecord {
                            dataset: d.name.clone(),
                            encoder: e.name.clone(),
                            params: params[job.encoder],
                            coherence: Some(eval.coherence.mean),
                            diversity: Some(eval.diversity),
                            k: Some(eval.k),
                            timestamp: cfg.timestamp.clone(),
                            seed,
                            measure: settings.coherence.measure.name().to_owned(),
                            diversity_measure: settings.diversity.name().to_owned(),
                        }),
                        detail: None,
                        wall_ms: started.elapsed().as_millis() as u64,
                    }
                };
                let mut line = serde_json::to_string(&entry)?;
                line.push('\n');
                {
                    let mut f = journal.lock().map_err(|_| CliError::Internal("journal lock poisoned".into()))?;
                    f.write_all(line.as_bytes())?;
                    f.flush()?;
                }
                finished.fetch_add(1, Ordering::SeqCst);
                Ok(Some(entry))
            })
            .collect()
    });

    let mut records = resumed;
    let resumed_count = records.len();
    let mut gaps = Vec::new();
    let mut ran_now = 0;
    let mut complete = true;
    for (job, r) in jobs.iter().zip(results) {
        match r? {
            None => complete = false,
            Some(entry) => {
                ran_now += 1;
                match entry.status {
                    JobStatus::Done => records.extend(entry.record),
                    JobStatus::MissingEmbeddings => gaps.push((entry.dataset, entry.encoder, job.embeddings.clone())),
                }
            }
        }
    }
    crate::records::sort_records(&mut records);
    gaps.sort();

    if complete {
        write_records(out, &records)?;
        let by_dataset: BTreeMap<&str, usize> = records.iter().fold(BTreeMap::new(), |mut m, r| {
            *m.entry(r.dataset.as_str()).or_default() += 1;
            m
        });
        log::info!("sweep complete: {} record(s) {:?}, {} gap(s)", records.len(), by_dataset, gaps.len());
    } else {
        log::warn!("sweep stopped early after {ran_now} job(s); rerun to resume");
    }
    Ok(SweepOutcome {
        records,
        gaps,
        ran_now,
        resumed: resumed_count,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config() {
        let cfg = SweepConfig::from_toml(
            r#"
            seed = 7
            jobs = 2
            measure = "c_npmi"
            [pipeline]
            clusterer = "kmeans"
            k = 4
            [[dataset]]
            name = "a"
            corpus = "a.corpus"
            [[encoder]]
            name = "small"
            params = "22M"
            embeddings = "{dataset}/small.emb"
            [[encoder]]
            name = "big"
            params = 7000000000
            embeddings = "{dataset}/big.emb"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.encoders[0].params.resolve().unwrap(), 22_000_000);
        assert_eq!(cfg.encoders[1].params.resolve().unwrap(), 7_000_000_000);
        let s = cfg.eval_settings().unwrap();
        assert_eq!(s.coherence.measure, CoherenceMeasure::CNpmi);
        assert_eq!(s.coherence.window_size, 70);
        assert_eq!(
            cfg.pipeline_config(7).unwrap().clusterer,
            Clusterer::KMeans { k: 4, max_iters: 300 }
        );
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SweepConfig::from_toml("jobs = 1").is_err());
        let dup = r#"
            [[dataset]]
            name = "a"
            corpus = "x"
            [[dataset]]
            name = "a"
            corpus = "y"
            [[encoder]]
            name = "e"
            params = 1
            embeddings = "z"
        "#;
        assert!(SweepConfig::from_toml(dup).is_err());
        let unknown = r#"
            bogus = 1
            [[dataset]]
            name = "a"
            corpus = "x"
            [[encoder]]
            name = "e"
            params = 1
            embeddings = "z"
        "#;
        assert!(SweepConfig::from_toml(unknown).is_err());
    }
}
