//! Line-per-record JSON files: joined records and generated corpora.

use std::io::{self, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::generation::GenerationResult;
use crate::metadata::ReconstructionRecord;

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub track_id: String,
    #[serde(default)]
    pub prompt_digest: String,
    #[serde(default)]
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<DateTime<Utc>>,
    pub lyrics: String,
}

impl From<GenerationResult> for CorpusEntry {
    fn from(r: GenerationResult) -> Self {
        CorpusEntry {
            track_id: r.track_id,
            prompt_digest: r.prompt_digest,
            model: r.model,
            created_at: Some(r.created_at),
            lyrics: r.lyrics,
        }
    }
}

/// A line that failed to parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

fn parse_lines<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, LineError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(line).map_err(|e| LineError {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

fn to_lines<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_records(text: &str) -> Result<Vec<ReconstructionRecord>, LineError> {
    let records: Vec<ReconstructionRecord> = parse_lines(text)?;
    let mut seen = std::collections::HashSet::new();
    for (i, r) in records.iter().enumerate() {
        let problem = if r.track_id.is_empty() {
            Some("empty track_id".to_string())
        } else if !seen.insert(r.track_id.as_str()) {
            Some(format!("duplicate track_id {}", r.track_id))
        } else if r.genres.is_empty() {
            Some("no genres".to_string())
        } else if r.vocabulary.is_empty() {
            Some("empty vocabulary".to_string())
        } else {
            None
        };
        if let Some(message) = problem {
            // blank lines are skipped, so find the physical line again
            let line = nth_content_line(text, i);
            return Err(LineError { line, message });
        }
    }
    Ok(records)
}

fn nth_content_line(text: &str, n: usize) -> usize {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .nth(n)
        .map_or(0, |(i, _)| i + 1)
}

pub fn records_to_string(records: &[ReconstructionRecord]) -> String {
    to_lines(records)
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, LineError> {
    parse_lines(text)
}

pub fn corpus_to_string(entries: &[CorpusEntry]) -> String {
    to_lines(entries)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
