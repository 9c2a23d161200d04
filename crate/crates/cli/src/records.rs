//! Run records: one row per (dataset, encoder) evaluation.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::archive::write_atomic;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub encoder: String,
    /// Declared parameter count of the encoder.
    #[serde(deserialize_with = "de_param_count")]
    pub params: u64,
    /// Mean topic coherence; empty when the combination was not evaluated.
    pub coherence: Option<f64>,
    pub diversity: Option<f64>,
    /// Number of topics.
    pub k: Option<usize>,
    /// Free-form label (e.g. a date) supplied by the caller; never the wall
    /// clock, so reruns stay byte-identical.
    #[serde(default)]
    pub timestamp: String,
    pub seed: u64,
    #[serde(default)]
    pub measure: String,
    #[serde(default)]
    pub diversity_measure: String,
}

impl RunRecord {
    pub fn key(&self) -> (&str, &str) {
        (&self.dataset, &self.encoder)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(CliError::Data(format!("record ({}, {}): {what}", self.dataset, self.encoder)));
        if self.params == 0 {
            return bad("params must be positive".into());
        }
        if let Some(c) = self.coherence {
            if !(-1.0..=1.0).contains(&c) {
                return bad(format!("coherence {c} outside [-1, 1]"));
            }
        }
        if let Some(d) = self.diversity {
            if !(0.0..=1.0).contains(&d) {
                return bad(format!("diversity {d} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Parse `22M`, `1.5B`, `66_000_000`, `350k` into a parameter count.
pub fn parse_param_count(s: &str) -> Result<u64> {
    let t = s.trim().replace('_', "");
    let (num, mult) = match t.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&t[..t.len() - 1], 1e3),
        Some('M') => (&t[..t.len() - 1], 1e6),
        Some('B') => (&t[..t.len() - 1], 1e9),
        _ => (t.as_str(), 1.0),
    };
    if mult == 1.0 {
        if let Ok(n) = num.parse::<u64>() {
            if n > 0 {
                return Ok(n);
            }
        }
    }
    let x: f64 = num
        .parse()
        .map_err(|_| CliError::Data(format!("invalid parameter count '{s}'")))?;
    let v = (x * mult).round();
    if !(v >= 1.0 && v < u64::MAX as f64) {
        return Err(CliError::Data(format!("invalid parameter count '{s}'")));
    }
    Ok(v as u64)
}

/// Accepts a bare number (JSON) or text such as `22M` (CSV, TOML).
fn de_param_count<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(u64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Number(n) => Ok(n),
        Raw::Text(s) => parse_param_count(&s).map_err(serde::de::Error::custom),
    }
}

/// Stable order: (dataset, encoder), then the remaining fields.
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.key()
            .cmp(&b.key())
            .then(a.params.cmp(&b.params))
            .then(a.seed.cmp(&b.seed))
            .then(a.timestamp.cmp(&b.timestamp))
    });
}

pub fn records_to_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &sorted {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_atomic(path, &records_to_csv(records)?)
}

pub fn read_records_from(reader: impl std::io::Read) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let rec: RunRecord = row?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let f = std::fs::File::open(path).map_err(|e| CliError::unreadable(path, e))?;
    read_records_from(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(dataset: &str, encoder: &str, c: Option<f64>) -> RunRecord {
        RunRecord {
            dataset: dataset.into(),
            encoder: encoder.into(),
            params: 22_000_000,
            coherence: c,
            diversity: c.map(|_| 0.99),
            k: c.map(|_| 12),
            timestamp: String::new(),
            seed: 42,
            measure: "c_v".into(),
            diversity_measure: "unique".into(),
        }
    }

    #[test]
    fn param_counts() {
        assert_eq!(parse_param_count("22M").unwrap(), 22_000_000);
        assert_eq!(parse_param_count("7B").unwrap(), 7_000_000_000);
        assert_eq!(parse_param_count("1.5b").unwrap(), 1_500_000_000);
        assert_eq!(parse_param_count("66_000_000").unwrap(), 66_000_000);
        assert!(parse_param_count("0").is_err());
        assert!(parse_param_count("lots").is_err());
    }

    #[test]
    fn csv_round_trip_keeps_missing_cells_empty() {
        let recs = vec![rec("b", "x", Some(0.5)), rec("a", "y", None), rec("a", "x", Some(0.25))];
        let bytes = records_to_csv(&recs).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("dataset,encoder,params,coherence,diversity,k,timestamp,seed,measure,diversity_measure\n"));
        assert!(text.contains("a,y,22000000,,,,,42,"));
        let back = read_records_from(&bytes[..]).unwrap();
        assert_eq!(back.iter().map(|r| r.key()).collect::<Vec<_>>(), vec![("a", "x"), ("a", "y"), ("b", "x")]);
        assert_eq!(back[1].coherence, None);
        assert_eq!(records_to_csv(&back).unwrap(), bytes);
    }

    #[test]
    fn invalid_records_rejected() {
        let mut r = rec("a", "x", Some(1.5));
        assert!(r.validate().is_err());
        r.coherence = Some(0.5);
        r.params = 0;
        assert!(r.validate().is_err());
    }
}
