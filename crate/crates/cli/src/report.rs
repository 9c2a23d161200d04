//! Per-encoder aggregation of run records: mean and sample standard deviation
//! over the datasets each encoder was evaluated on.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::records::{sort_records, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub count: usize,
    pub mean: f64,
    /// Sample (n − 1) standard deviation; 0 for a single value.
    pub std: f64,
}

/// Mean and sample standard deviation, `None` for no values.
pub fn mean_std(values: &[f64]) -> Option<Stat> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Stat { count: n, mean, std })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncoderSummary {
    pub encoder: String,
    pub params: u64,
    /// Datasets with a record for this encoder, present or missing.
    pub n_records: usize,
    pub coherence: Option<Stat>,
    pub diversity: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    /// Sorted by parameter count, then encoder name.
    pub encoders: Vec<EncoderSummary>,
}

pub fn summarize(records: &[RunRecord]) -> Result<ReportSummary> {
    if records.is_empty() {
        return Err(CliError::EmptyRecords);
    }
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut groups: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in &sorted {
        groups.entry(r.encoder.as_str()).or_default().push(r);
    }
    let mut encoders = Vec::with_capacity(groups.len());
    for (encoder, recs) in groups {
        let params = recs[0].params;
        if let Some(other) = recs.iter().find(|r| r.params != params) {
            return Err(CliError::Data(format!(
                "encoder '{encoder}' declared with both {params} and {} parameters",
                other.params
            )));
        }
        let coh: Vec<f64> = recs.iter().filter_map(|r| r.coherence).collect();
        let div: Vec<f64> = recs.iter().filter_map(|r| r.diversity).collect();
        encoders.push(EncoderSummary {
            encoder: encoder.to_owned(),
            params,
            n_records: recs.len(),
            coherence: mean_std(&coh),
            diversity: mean_std(&div),
        });
    }
    encoders.sort_by(|a, b| a.params.cmp(&b.params).then_with(|| a.encoder.cmp(&b.encoder)));
    Ok(ReportSummary { encoders })
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl ReportSummary {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("encoder,params,n_coherence,coherence_mean,coherence_std,n_diversity,diversity_mean,diversity_std\n");
        for e in &self.encoders {
            let name = if e.encoder.contains([',', '"', '\n']) {
                format!("\"{}\"", e.encoder.replace('"', "\"\""))
            } else {
                e.encoder.clone()
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                name,
                e.params,
                e.coherence.map_or(0, |c| c.count),
                cell(e.coherence.map(|c| c.mean)),
                cell(e.coherence.map(|c| c.std)),
                e.diversity.map_or(0, |c| c.count),
                cell(e.diversity.map(|c| c.mean)),
                cell(e.diversity.map(|c| c.std)),
            );
        }
        s
    }

    /// `params,mean,std` rows for plotting coherence (or diversity) against
    /// model size; encoders without values are omitted.
    pub fn figure_csv(&self, diversity: bool) -> String {
        let mut s = String::from("params,mean,std\n");
        for e in &self.encoders {
            let stat = if diversity { e.diversity } else { e.coherence };
            if let Some(st) = stat {
                let _ = writeln!(s, "{},{:.6},{:.6}", e.params, st.mean, st.std);
            }
        }
        s
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let w = self.encoders.iter().map(|e| e.encoder.len()).max().unwrap_or(0).max(7);
        let mut s = format!(
            "{:<w$} {:>14} {:>4} {:>10} {:>10} {:>10} {:>10}\n",
            "encoder", "params", "n", "coh_mean", "coh_std", "div_mean", "div_std"
        );
        for e in &self.encoders {
            let f = |x: Option<f64>| x.map_or("-".to_owned(), |v| format!("{v:.4}"));
            let _ = writeln!(
                s,
                "{:<w$} {:>14} {:>4} {:>10} {:>10} {:>10} {:>10}",
                e.encoder,
                e.params,
                e.coherence.map_or(0, |c| c.count),
                f(e.coherence.map(|c| c.mean)),
                f(e.coherence.map(|c| c.std)),
                f(e.diversity.map(|c| c.mean)),
                f(e.diversity.map(|c| c.std)),
            );
        }
        s
    }
}
