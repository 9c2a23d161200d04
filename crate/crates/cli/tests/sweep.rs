mod common;

use std::fs;
use std::path::Path;

use common::{sweep_config, write_dataset};
use topiceval_cli::records::read_records;
use topiceval_cli::sweep::{journal_path_for, run_sweep, SweepOptions};

fn grid(dir: &Path, with_second_embedding: bool) -> std::path::PathBuf {
    write_dataset(dir, "alpha", 120, 1, &[("small", 10), ("large", 11)]);
    let second: &[(&str, u64)] = if with_second_embedding { &[("small", 12), ("large", 13)] } else { &[("small", 12)] };
    write_dataset(dir, "beta", 100, 2, second);
    sweep_config(dir, &["alpha", "beta"], &[("small", "22M"), ("large", "110M")], 2)
}

fn opts() -> SweepOptions {
    SweepOptions {
        default_seed: 42,
        ..SweepOptions::default()
    }
}

#[test]
fn two_by_two_grid_yields_four_sorted_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = grid(dir.path(), true);
    let out = dir.path().join("records.csv");
    let outcome = run_sweep(&cfg, &out, &opts()).unwrap();
    assert!(outcome.complete);
    assert!(outcome.gaps.is_empty());
    let recs = read_records(&out).unwrap();
    let keys: Vec<(&str, &str)> = recs.iter().map(|r| r.key()).collect();
    assert_eq!(keys, [("alpha", "large"), ("alpha", "small"), ("beta", "large"), ("beta", "small")]);
    for r in &recs {
        assert_eq!(r.k, Some(4));
        assert_eq!((r.seed, r.timestamp.as_str()), (7, "t0"));
        assert!(r.coherence.is_some() && r.diversity.is_some());
    }
    assert_eq!(recs[0].params, 110_000_000);
}

#[test]
fn missing_embedding_file_is_a_gap_not_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = grid(dir.path(), false);
    let out = dir.path().join("records.csv");
    let outcome = run_sweep(&cfg, &out, &opts()).unwrap();
    assert_eq!(outcome.records.len(), 3);
    assert_eq!(outcome.gaps.len(), 1);
    assert_eq!((outcome.gaps[0].0.as_str(), outcome.gaps[0].1.as_str()), ("beta", "large"));
    assert_eq!(read_records(&out).unwrap().len(), 3);

    // supplying the file later fills the gap on rerun without redoing the rest
    write_dataset(dir.path(), "beta", 100, 2, &[("small", 12), ("large", 13)]);
    let again = run_sweep(&cfg, &out, &opts()).unwrap();
    assert_eq!((again.records.len(), again.ran_now, again.resumed), (4, 1, 3));
}

#[test]
fn interrupted_sweep_resumes_to_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = grid(dir.path(), true);

    let full = dir.path().join("full.csv");
    run_sweep(&cfg, &full, &opts()).unwrap();

    let out = dir.path().join("resumed.csv");
    let first = run_sweep(
        &cfg,
        &out,
        &SweepOptions {
            stop_after: Some(1),
            jobs: Some(1),
            ..opts()
        },
    )
    .unwrap();
    assert!(!first.complete);
    assert!(!out.exists(), "no CSV until the sweep is complete");
    assert_eq!(fs::read_to_string(journal_path_for(&out)).unwrap().lines().count(), 1);

    let second = run_sweep(&cfg, &out, &opts()).unwrap();
    assert!(second.complete);
    assert_eq!((second.resumed, second.ran_now), (1, 3));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&full).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = grid(dir.path(), true);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_sweep(&cfg, &a, &SweepOptions { jobs: Some(1), ..opts() }).unwrap();
    run_sweep(&cfg, &b, &SweepOptions { jobs: Some(4), ..opts() }).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
