//! Subcommand implementations. Each returns the text it prints on stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;
use topiceval_core::classic::{lda_fit, lda_topic_set, nmf_fit, nmf_topic_set, LdaConfig, NmfConfig};
use topiceval_core::coherence::CoherenceConfig;
use topiceval_core::embed::{load_embeddings, run_pipeline, Clusterer, HdbscanParams, PipelineConfig};
use topiceval_core::textprep::{english_stopwords, tfidf, TokenizerConfig};

use crate::archive::{write_atomic, CorpusArchive};
use crate::cli::*;
use crate::error::{CliError, Result};
use crate::evaluate::{coherence_stats, evaluate_pipeline, evaluate_topics, score_coherence, score_diversity, EvalSettings};
use crate::loaders::{load_documents, LoadOptions};
use crate::records::{parse_param_count, read_records, records_to_csv, write_records, RunRecord};
use crate::report::summarize;
use crate::sweep::{run_sweep, SweepOptions};
use crate::topicfile::TopicsFile;

pub fn dispatch(cmd: Command) -> Result<String> {
    match cmd {
        Command::Preprocess(a) => preprocess(a),
        Command::Lda(a) => lda(a),
        Command::Nmf(a) => nmf(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Coherence(a) => coherence(a),
        Command::Diversity(a) => diversity(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
    }
}

fn emit(text: String, out: Option<&Path>) -> Result<String> {
    match out {
        Some(p) => {
            write_atomic(p, text.as_bytes())?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn tokenizer_from(a: &PreprocessArgs) -> Result<TokenizerConfig> {
    let stopwords = if a.no_stopwords {
        Default::default()
    } else if let Some(p) = &a.stopwords {
        fs::read_to_string(p)
            .map_err(|e| CliError::unreadable(p, e))?
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    } else {
        english_stopwords()
    };
    let cfg = TokenizerConfig {
        lowercase: !a.keep_case,
        strip_punctuation: !a.keep_punctuation,
        min_token_len: a.min_len,
        max_token_len: a.max_len,
        alphabetic_only: !a.keep_non_alphabetic,
        stopwords,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn preprocess(a: PreprocessArgs) -> Result<String> {
    let cfg = tokenizer_from(&a)?;
    let opts = LoadOptions {
        text_field: a.text_field.clone(),
        id_field: a.id_field.clone(),
    };
    let docs = load_documents(&a.input, a.format, &opts)?;
    let archive = CorpusArchive::build(&docs, &cfg)?;
    archive.write(&a.out)?;
    Ok(format!(
        "{}\n",
        json!({
            "docs": archive.corpus.n_docs(),
            "vocab": archive.corpus.vocab.len(),
            "tokens": archive.n_tokens(),
            "out": a.out.display().to_string(),
        })
    ))
}

fn lda(a: LdaArgs) -> Result<String> {
    let archive = CorpusArchive::read(&a.corpus)?;
    let mut cfg = LdaConfig::new(a.k);
    if let Some(alpha) = a.alpha {
        cfg.alpha = alpha;
    }
    cfg.beta = a.beta;
    cfg.sweeps = a.sweeps;
    cfg.seed = a.seed.seed;
    let state = lda_fit(&archive.corpus, &cfg)?;
    let set = lda_topic_set(&state, cfg.beta, a.top_n);
    let meta = json!({"k": cfg.k, "alpha": cfg.alpha, "beta": cfg.beta, "sweeps": cfg.sweeps, "seed": cfg.seed});
    TopicsFile::from_topic_set("lda", &set, &archive.corpus.vocab, meta).write(&a.out)?;
    Ok(format!("wrote {} topics to {}\n", set.len(), a.out.display()))
}

fn nmf(a: NmfArgs) -> Result<String> {
    let archive = CorpusArchive::read(&a.corpus)?;
    let v = tfidf(&archive.corpus)?.to_dense();
    let mut cfg = NmfConfig::new(a.k);
    cfg.iters = a.iters;
    cfg.tol = a.tol;
    cfg.seed = a.seed.seed;
    let factors = nmf_fit(&v, &cfg)?;
    let set = nmf_topic_set(&factors, a.top_n);
    let meta = json!({
        "k": cfg.k, "iters": factors.objective_trace.len(), "tol": cfg.tol, "seed": cfg.seed,
        "relative_error": factors.relative_error(&v),
    });
    TopicsFile::from_topic_set("nmf", &set, &archive.corpus.vocab, meta).write(&a.out)?;
    Ok(format!("wrote {} topics to {}\n", set.len(), a.out.display()))
}

pub fn pipeline_config(f: &PipelineFlags, top_n: usize, seed: u64) -> Result<PipelineConfig> {
    let clusterer = match f.clusterer {
        ClustererArg::Hdbscan => Clusterer::Hdbscan(HdbscanParams {
            min_cluster_size: f.min_cluster_size,
            min_samples: f.min_samples,
        }),
        ClustererArg::Kmeans => Clusterer::KMeans {
            k: f.clusters.ok_or_else(|| CliError::Usage("--clusters is required with --clusterer kmeans".into()))?,
            max_iters: f.max_iters,
        },
    };
    Ok(PipelineConfig {
        reduce_dim: f.reduce_dim,
        clusterer,
        top_n,
        seed,
    })
}

fn pipeline(a: PipelineArgs) -> Result<String> {
    let archive = CorpusArchive::read(&a.corpus)?;
    let emb = load_embeddings(&a.embeddings)?;
    let cfg = pipeline_config(&a.pipeline, a.top_n, a.seed.seed)?;
    let out = run_pipeline(&archive.corpus, &emb, &cfg)?;
    let meta = serde_json::to_value(&out.metadata)?;
    TopicsFile::from_topic_set("pipeline", &out.topics, &archive.corpus.vocab, meta).write(&a.out)?;
    if let Some(p) = &a.labels {
        let mut s = String::from("doc_id,label\n");
        for (id, l) in archive.corpus.doc_ids.iter().zip(&out.assignment.labels) {
            let _ = writeln!(s, "{},{l}", csv_field(id));
        }
        write_atomic(p, s.as_bytes())?;
    }
    Ok(format!(
        "{}\n",
        json!({"k": out.metadata.k, "noise_fraction": out.metadata.noise_fraction, "topics": out.topics.len()})
    ))
}

pub fn coherence_config(m: &MeasureFlags) -> CoherenceConfig {
    let mut cfg = CoherenceConfig::new(m.measure.into());
    if let Some(w) = m.window {
        cfg.window_size = w;
    }
    cfg.top_n = m.top_n;
    cfg.epsilon = m.epsilon;
    cfg.cv_reference = m.cv_reference.into();
    cfg
}

fn coherence(a: CoherenceArgs) -> Result<String> {
    let archive = CorpusArchive::read(&a.corpus)?;
    let set = TopicsFile::read(&a.topics)?.to_topic_set(&archive.corpus.vocab)?;
    let cfg = coherence_config(&a.measure);
    if cfg.window_size == 0 {
        return Err(CliError::Usage("--window must be at least 1".into()));
    }
    if let Some(p) = &a.dump_stats {
        let stats = coherence_stats(&archive, &set, &cfg)?;
        let vocab = &archive.corpus.vocab;
        let mut s = String::from("word_i,word_j,joint,occur_i,occur_j,n_virtual\n");
        for (wi, wj, joint, oi, oj) in stats.pairs() {
            let _ = writeln!(
                s,
                "{},{},{joint},{oi},{oj},{}",
                csv_field(vocab.token(wi).unwrap_or_default()),
                csv_field(vocab.token(wj).unwrap_or_default()),
                stats.n_virtual()
            );
        }
        write_atomic(p, s.as_bytes())?;
    }
    let scores = score_coherence(&archive, &set, &cfg)?;
    let text = match a.format {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&scores)?),
        OutputFormat::Csv => {
            let mut s = String::from("label,score\n");
            for (l, v) in scores.labels.iter().zip(&scores.per_topic) {
                let _ = writeln!(s, "{l},{v}");
            }
            s
        }
    };
    emit(text, a.out.as_deref())
}

fn diversity(a: DiversityArgs) -> Result<String> {
    let archive = CorpusArchive::read(&a.corpus)?;
    let set = TopicsFile::read(&a.topics)?.to_topic_set(&archive.corpus.vocab)?;
    let value = score_diversity(&set, a.diversity, a.top_n)?;
    let text = match a.format {
        OutputFormat::Json => format!(
            "{}\n",
            json!({"measure": a.diversity.name(), "top_n": a.top_n, "k": set.len(), "value": value})
        ),
        OutputFormat::Csv => format!("measure,top_n,k,value\n{},{},{},{value}\n", a.diversity.name(), a.top_n, set.len()),
    };
    emit(text, a.out.as_deref())
}

fn evaluate(a: EvaluateArgs) -> Result<String> {
    let params = parse_param_count(&a.params).map_err(|e| CliError::Usage(e.to_string()))?;
    let settings = EvalSettings {
        coherence: coherence_config(&a.measure),
        diversity: a.diversity,
    };
    let mut record = RunRecord {
        dataset: a.dataset.clone(),
        encoder: a.encoder.clone(),
        params,
        coherence: None,
        diversity: None,
        k: None,
        timestamp: a.timestamp.clone(),
        seed: a.seed.seed,
        measure: settings.coherence.measure.name().to_owned(),
        diversity_measure: settings.diversity.name().to_owned(),
    };
    let archive = CorpusArchive::read(&a.corpus)?;
    let eval = match (&a.topics, &a.embeddings) {
        (Some(t), _) => {
            let set = TopicsFile::read(t)?.to_topic_set(&archive.corpus.vocab)?;
            Some(evaluate_topics(&archive, &set, &settings)?)
        }
        (None, Some(e)) if !e.exists() && a.allow_missing => {
            log::warn!("({}, {}): no embedding file at {}; leaving cells empty", a.dataset, a.encoder, e.display());
            None
        }
        (None, Some(e)) => {
            let emb = load_embeddings(e)?;
            let cfg = pipeline_config(&a.pipeline, settings.coherence.top_n, a.seed.seed)?;
            Some(evaluate_pipeline(&archive, &emb, &cfg, &settings)?.1)
        }
        (None, None) => return Err(CliError::Usage("pass --topics or --embeddings".into())),
    };
    if let Some(ev) = eval {
        record.coherence = Some(ev.coherence.mean);
        record.diversity = Some(ev.diversity);
        record.k = Some(ev.k);
    }
    record.validate()?;

    if let Some(out) = &a.out {
        let mut all = if out.exists() { read_records(out)? } else { Vec::new() };
        all.retain(|r| r.key() != record.key());
        all.push(record.clone());
        write_records(out, &all)?;
    }
    Ok(match a.format {
        OutputFormat::Csv => String::from_utf8(records_to_csv(&[record])?).map_err(|e| CliError::Internal(e.to_string()))?,
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&record)?),
    })
}

fn sweep(a: SweepArgs) -> Result<String> {
    let opts = SweepOptions {
        jobs: a.jobs,
        journal: a.journal.clone(),
        stop_after: a.stop_after,
        default_seed: a.seed.seed,
    };
    let outcome = run_sweep(&a.config, &a.out, &opts)?;
    let mut s = format!(
        "{} record(s): {} job(s) run now, {} resumed, {} gap(s){}\n",
        outcome.records.len(),
        outcome.ran_now,
        outcome.resumed,
        outcome.gaps.len(),
        if outcome.complete { "" } else { " — incomplete, rerun to resume" }
    );
    for (d, e, p) in &outcome.gaps {
        let _ = writeln!(s, "gap: {d} / {e}: missing {}", p.display());
    }
    Ok(s)
}

fn report(a: ReportArgs) -> Result<String> {
    let records = read_records(&a.records)?;
    let summary = summarize(&records)?;
    if let Some(p) = &a.summary {
        write_atomic(p, summary.to_csv().as_bytes())?;
    }
    if let Some(p) = &a.figure {
        write_atomic(p, summary.figure_csv(false).as_bytes())?;
    }
    if let Some(p) = &a.diversity_figure {
        write_atomic(p, summary.figure_csv(true).as_bytes())?;
    }
    Ok(match a.format {
        None => summary.to_table(),
        Some(OutputFormat::Csv) => summary.to_csv(),
        Some(OutputFormat::Json) => format!("{}\n", serde_json::to_string_pretty(&summary)?),
    })
}
