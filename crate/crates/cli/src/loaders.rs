//! Raw document loaders for the three corpus shapes: a directory of text
//! files, a CSV file with a text column, and JSON lines with a `text` field.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Dir,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDoc {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// CSV column / JSON field holding the text.
    pub text_field: String,
    /// CSV column / JSON field holding the id; the record index is used when
    /// the field is absent.
    pub id_field: String,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            text_field: "text".into(),
            id_field: "id".into(),
        }
    }
}

pub fn detect_format(path: &Path) -> Result<InputFormat> {
    if path.is_dir() {
        return Ok(InputFormat::Dir);
    }
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("csv") => Ok(InputFormat::Csv),
        Some("jsonl") | Some("ndjson") => Ok(InputFormat::Jsonl),
        _ => Err(CliError::UnknownFormat(path.display().to_string())),
    }
}

pub fn load_documents(path: &Path, format: Option<InputFormat>, opts: &LoadOptions) -> Result<Vec<RawDoc>> {
    if !path.exists() {
        return Err(CliError::unreadable(path, "no such file or directory"));
    }
    let format = match format {
        Some(f) => f,
        None => detect_format(path)?,
    };
    let docs = match format {
        InputFormat::Dir => load_dir(path)?,
        InputFormat::Csv => load_csv(path, opts)?,
        InputFormat::Jsonl => load_jsonl(path, opts)?,
    };
    log::info!("loaded {} documents from {}", docs.len(), path.display());
    Ok(docs)
}

/// One document per regular file, walked recursively in file-name order.
/// Hidden files are skipped; ids are paths relative to `root` with `/`
/// separators. Bytes that are not valid UTF-8 are replaced.
fn load_dir(root: &Path) -> Result<Vec<RawDoc>> {
    if !root.is_dir() {
        return Err(CliError::unreadable(root, "not a directory"));
    }
    let mut docs = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = entry.map_err(|e| CliError::unreadable(root, e))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let bytes = fs::read(entry.path()).map_err(|e| CliError::unreadable(entry.path(), e))?;
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        docs.push(RawDoc {
            id,
            text: String::from_utf8_lossy(&bytes).into_owned(),
        });
    }
    Ok(docs)
}

fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Vec<RawDoc>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::unreadable(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::unreadable(path, e))?.clone();
    let text_col = headers.iter().position(|h| h == opts.text_field).ok_or_else(|| {
        CliError::Data(format!(
            "{}: no column named '{}' (columns: {})",
            path.display(),
            opts.text_field,
            headers.iter().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let id_col = headers.iter().position(|h| h == opts.id_field);
    let mut docs = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        docs.push(RawDoc {
            id: id_col.and_then(|c| row.get(c)).map_or_else(|| i.to_string(), str::to_owned),
            text: row.get(text_col).unwrap_or_default().to_owned(),
        });
    }
    Ok(docs)
}

fn load_jsonl(path: &Path, opts: &LoadOptions) -> Result<Vec<RawDoc>> {
    let content = fs::read_to_string(path).map_err(|e| CliError::unreadable(path, e))?;
    let mut docs = Vec::new();
    for (n, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), n + 1)))?;
        let text = value.get(&opts.text_field).and_then(|v| v.as_str()).ok_or_else(|| {
            CliError::Data(format!(
                "{} line {}: missing string field '{}'",
                path.display(),
                n + 1,
                opts.text_field
            ))
        })?;
        let id = match value.get(&opts.id_field) {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(serde_json::Value::Number(x)) => x.to_string(),
            _ => docs.len().to_string(),
        };
        docs.push(RawDoc {
            id,
            text: text.to_owned(),
        });
    }
    Ok(docs)
}
