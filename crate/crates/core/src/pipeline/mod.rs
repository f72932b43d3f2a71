//! File-level commands: join, reconstruct, evaluate and report.
//!
//! Each command reads plain files and writes plain files, so runs can be
//! inspected, resumed and diffed.

mod corpus;
mod manifest;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bow::parse_bow;
use crate::eval::{bow_coverage, compare, compare_labeled, corpus_stats, frequency_fidelity};
use crate::eval::{ComparisonReport, CorpusStats, EvalError};
use crate::generation::{BackendConfig, GenerationError, GenerationStats, Generator};
use crate::metadata::{
    join_records, parse_genre_table, parse_mood_table, parse_track_meta, JoinReport, MetaColumns,
    MoodColumns, ReconstructionRecord,
};
use crate::mood::MoodTable;
use crate::prompt::{build_prompt_with, Prompt, PromptOptions};
use crate::text::{segment, Lexicon, LyricDoc};

pub use corpus::{
    corpus_to_string, parse_corpus, parse_records, records_to_string, write_atomic, CorpusEntry,
    LineError,
};
pub use manifest::{JsonlAppender, ManifestEvent, RunManifest, StatusCounts, TrackStatus};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no track is present in every input\n{0}")]
    EmptyJoin(JoinReport),
    #[error("{path} was written by a run with different inputs or settings; remove it (and its .parts.jsonl) or pick another output path")]
    ManifestMismatch { path: String },
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::EmptyJoin(_) => 3,
            PipelineError::Io { .. } => 1,
            PipelineError::Generation(e)
                if e.is_fatal() && !matches!(e, GenerationError::Cache(_)) =>
            {
                2
            }
            PipelineError::Generation(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, message: impl ToString) -> PipelineError {
    PipelineError::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

fn write(path: &Path, contents: &str) -> Result<(), PipelineError> {
    write_atomic(path, contents.as_bytes()).map_err(io_err(path))
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JoinConfig {
    /// Field separator of the mood and metadata tables.
    pub delimiter: char,
    pub mood_columns: MoodColumns,
    pub meta_columns: MetaColumns,
}

impl Default for JoinConfig {
    fn default() -> Self {
        JoinConfig {
            delimiter: ',',
            mood_columns: MoodColumns::default(),
            meta_columns: MetaColumns::default(),
        }
    }
}

/// Settings file contents. Every section and key is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub join: JoinConfig,
    pub backend: BackendConfig,
    pub prompt: PromptOptions,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Self::from_toml(&read(path)?).map_err(|e| match e {
            PipelineError::Config(m) => parse_err(path, m),
            other => other,
        })
    }
}

#[derive(Debug, Clone)]
pub struct JoinInputs {
    pub bow: PathBuf,
    pub mood: PathBuf,
    pub genre: PathBuf,
    pub meta: PathBuf,
    /// Built-in eight-sector table when `None`.
    pub mood_table: Option<PathBuf>,
}

/// Joins the four sources and writes the records file plus `<out>.report.txt`.
pub fn run_join(
    inputs: &JoinInputs,
    config: &JoinConfig,
    out: &Path,
) -> Result<(Vec<ReconstructionRecord>, JoinReport), PipelineError> {
    if !config.delimiter.is_ascii() {
        return Err(PipelineError::Config(format!(
            "delimiter {:?} is not a single ASCII character",
            config.delimiter
        )));
    }
    let delimiter = config.delimiter as u8;

    let bow = parse_bow(&read(&inputs.bow)?).map_err(|e| parse_err(&inputs.bow, e))?;
    let moods = parse_mood_table(
        read(&inputs.mood)?.as_bytes(),
        &config.mood_columns,
        delimiter,
    )
    .map_err(|e| parse_err(&inputs.mood, e))?;
    let genres = parse_genre_table(read(&inputs.genre)?.as_bytes())
        .map_err(|e| parse_err(&inputs.genre, e))?;
    let metas = parse_track_meta(
        read(&inputs.meta)?.as_bytes(),
        &config.meta_columns,
        delimiter,
    )
    .map_err(|e| parse_err(&inputs.meta, e))?;
    let table = match &inputs.mood_table {
        Some(path) => MoodTable::parse(&read(path)?).map_err(|e| parse_err(path, e))?,
        None => MoodTable::default(),
    };

    let (records, report) = join_records(&bow, &moods, &genres, &metas, &table);
    if records.is_empty() {
        return Err(PipelineError::EmptyJoin(report));
    }
    write(out, &records_to_string(&records))?;
    write(&sibling(out, ".report.txt"), &report.to_string())?;
    Ok((records, report))
}

pub fn load_records(path: &Path) -> Result<Vec<ReconstructionRecord>, PipelineError> {
    parse_records(&read(path)?)
        .map_err(|e| parse_err(path, format!("line {}: {}", e.line, e.message)))
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusEntry>, PipelineError> {
    parse_corpus(&read(path)?)
        .map_err(|e| parse_err(path, format!("line {}: {}", e.line, e.message)))
}

#[derive(Debug, Clone)]
pub struct ReconstructOptions {
    pub records: PathBuf,
    pub out: PathBuf,
    pub prompt: PromptOptions,
    /// Attempt at most this many outstanding tracks, leaving the rest pending.
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReconstructSummary {
    pub total: usize,
    pub done: usize,
    pub failed: usize,
    pub pending: usize,
    /// Tracks finished by this invocation.
    pub finished_now: usize,
    pub stats: GenerationStats,
    pub failures: Vec<(String, String)>,
}

impl ReconstructSummary {
    /// 4 when any track is in the failed state, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 {
            4
        } else {
            0
        }
    }
}

impl std::fmt::Display for ReconstructSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "tracks: {}", self.total)?;
        writeln!(f, "done: {}", self.done)?;
        writeln!(f, "failed: {}", self.failed)?;
        writeln!(f, "pending: {}", self.pending)?;
        writeln!(f, "backend calls: {}", self.stats.backend_calls)?;
        writeln!(f, "cache hits: {}", self.stats.cache_hits)?;
        for (id, reason) in &self.failures {
            writeln!(f, "failed {id}: {reason}")?;
        }
        Ok(())
    }
}

/// Digest of every setting that changes generated text.
pub fn config_digest(model: &str, backend: &BackendConfig, prompt: &PromptOptions) -> String {
    let value = serde_json::json!({
        "model": model,
        "decoding": backend.decoding,
        "prompt": prompt,
    });
    hex::encode(Sha256::digest(value.to_string().as_bytes()))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, ".manifest.jsonl")
}

pub fn journal_path(out: &Path) -> PathBuf {
    sibling(out, ".parts.jsonl")
}

/// Completed entries from the journal; the last entry for a track wins and a
/// torn final line is ignored.
fn load_journal(path: &Path) -> Result<HashMap<String, CorpusEntry>, PipelineError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut out = HashMap::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        let entry: CorpusEntry = serde_json::from_str(line.trim_end())
            .map_err(|e| parse_err(path, format!("line {}: {e}", i + 1)))?;
        out.insert(entry.track_id.clone(), entry);
    }
    Ok(out)
}

struct RunState {
    manifest: JsonlAppender,
    journal: JsonlAppender,
    status: BTreeMap<String, TrackStatus>,
    entries: HashMap<String, CorpusEntry>,
    finished_now: usize,
    fatal: Option<PipelineError>,
}

impl RunState {
    fn record(
        &mut self,
        prompt: &Prompt,
        result: Result<crate::generation::GenerationResult, GenerationError>,
    ) -> bool {
        let id = prompt.track_id.clone();
        let outcome = match result {
            Ok(r) => {
                let entry = CorpusEntry::from(r);
                // output line first, so a done event always has its text on disk
                self.journal
                    .append(&entry)
                    .and_then(|_| {
                        self.manifest.append(&ManifestEvent::Done {
                            track_id: id.clone(),
                        })
                    })
                    .map(|_| {
                        self.entries.insert(id.clone(), entry);
                        self.status.insert(id.clone(), TrackStatus::Done);
                        self.finished_now += 1;
                    })
                    .map_err(io_err(self.journal.path()))
            }
            Err(e) if e.is_fatal() => Err(PipelineError::Generation(e)),
            Err(e) => {
                let reason = e.to_string();
                log::warn!("{id}: {reason}");
                self.manifest
                    .append(&ManifestEvent::Failed {
                        track_id: id.clone(),
                        reason: reason.clone(),
                    })
                    .map(|_| {
                        self.status.insert(id.clone(), TrackStatus::Failed(reason));
                    })
                    .map_err(io_err(self.manifest.path()))
            }
        };
        match outcome {
            Ok(()) => true,
            Err(e) => {
                self.fatal.get_or_insert(e);
                false
            }
        }
    }
}

/// Generates lyrics for every record not yet done, then rewrites the corpus
/// file from all finished tracks in record order.
///
/// Progress is kept next to the output in `<out>.manifest.jsonl` and
/// `<out>.parts.jsonl`; rerunning with the same inputs picks up where the
/// last run stopped and retries failed tracks.
pub fn run_reconstruct(
    options: &ReconstructOptions,
    generator: &Generator,
) -> Result<ReconstructSummary, PipelineError> {
    let records = load_records(&options.records)?;
    let prompts: Vec<Prompt> = records
        .iter()
        .map(|r| build_prompt_with(r, &options.prompt))
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(&options.records, e))?;

    let config_digest = config_digest(generator.model(), generator.config(), &options.prompt);
    let input_digests = BTreeMap::from([("records".to_string(), file_digest(&options.records)?)]);

    let manifest_file = manifest_path(&options.out);
    let journal_file = journal_path(&options.out);
    let existing = RunManifest::load(&manifest_file).map_err(io_err(&manifest_file))?;
    let fresh = existing.is_none();
    let status = match existing {
        Some(m) if m.config_digest == config_digest && m.input_digests == input_digests => m.status,
        Some(_) => {
            return Err(PipelineError::ManifestMismatch {
                path: manifest_file.display().to_string(),
            })
        }
        None => BTreeMap::new(),
    };
    if fresh {
        match std::fs::remove_file(&journal_file) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(io_err(&journal_file)(e)),
            _ => {}
        }
    }
    let entries = load_journal(&journal_file)?;

    let mut manifest = JsonlAppender::open(&manifest_file).map_err(io_err(&manifest_file))?;
    if fresh {
        manifest
            .append(&ManifestEvent::Start {
                config_digest,
                input_digests,
            })
            .map_err(io_err(&manifest_file))?;
    }
    let journal = JsonlAppender::open(&journal_file).map_err(io_err(&journal_file))?;

    let done =
        |id: &str| matches!(status.get(id), Some(TrackStatus::Done)) && entries.contains_key(id);
    let todo: Vec<Prompt> = prompts
        .iter()
        .filter(|p| !done(&p.track_id))
        .take(options.limit.unwrap_or(usize::MAX))
        .cloned()
        .collect();
    log::info!("{} of {} tracks to generate", todo.len(), prompts.len());

    let state = Mutex::new(RunState {
        manifest,
        journal,
        status,
        entries,
        finished_now: 0,
        fatal: None,
    });
    generator.generate_batch(&todo, |prompt, result| {
        state.lock().expect("state lock").record(prompt, result)
    });
    let state = state.into_inner().expect("state lock");

    let mut summary = ReconstructSummary {
        total: records.len(),
        finished_now: state.finished_now,
        stats: generator.stats(),
        ..Default::default()
    };
    let mut output = Vec::new();
    for r in &records {
        let entry = state.entries.get(&r.track_id);
        match (state.status.get(&r.track_id), entry) {
            (Some(TrackStatus::Done), Some(entry)) => {
                summary.done += 1;
                output.push(entry.clone());
            }
            (Some(TrackStatus::Failed(reason)), _) => {
                summary.failed += 1;
                summary.failures.push((r.track_id.clone(), reason.clone()));
            }
            _ => summary.pending += 1,
        }
    }
    write(&options.out, &corpus_to_string(&output))?;

    match state.fatal {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub corpus: PathBuf,
    pub reference: Option<PathBuf>,
    pub abstract_lexicon: PathBuf,
    pub concrete_lexicon: PathBuf,
    /// Bag-of-words file for per-track coverage and fidelity.
    pub bow: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackFidelity {
    pub track_id: String,
    pub coverage: f64,
    /// `None` when fewer than two vocabulary words occur or all counts tie.
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateSummary {
    pub stats: CorpusStats,
    pub reference: Option<CorpusStats>,
    pub comparison: Option<ComparisonReport>,
    pub fidelity: Vec<TrackFidelity>,
    /// Corpus tracks with no bag-of-words entry.
    pub missing_bow: usize,
}

impl EvaluateSummary {
    pub fn mean_coverage(&self) -> Option<f64> {
        if self.fidelity.is_empty() {
            return None;
        }
        Some(self.fidelity.iter().map(|t| t.coverage).sum::<f64>() / self.fidelity.len() as f64)
    }
}

fn load_lexicon(path: &Path, name: &str) -> Result<Lexicon, PipelineError> {
    Lexicon::parse(name, &read(path)?).map_err(|e| parse_err(path, e))
}

fn docs(entries: &[CorpusEntry]) -> Vec<LyricDoc> {
    entries.iter().map(|e| segment(&e.lyrics)).collect()
}

fn stats_for(path: &Path, abs: &Lexicon, con: &Lexicon) -> Result<CorpusStats, PipelineError> {
    corpus_stats(&docs(&load_corpus(path)?), abs, con).map_err(|e| parse_err(path, e))
}

/// Writes `stats.tsv`/`stats.txt`, and with a reference corpus also
/// `reference_stats.*` and `report.txt`/`report.tsv`. With a bag-of-words
/// file, per-track scores go to `fidelity.tsv`.
pub fn run_evaluate(options: &EvaluateOptions) -> Result<EvaluateSummary, PipelineError> {
    let abs = load_lexicon(&options.abstract_lexicon, "abstract")?;
    let con = load_lexicon(&options.concrete_lexicon, "concrete")?;
    let entries = load_corpus(&options.corpus)?;
    let docs = docs(&entries);
    let stats = corpus_stats(&docs, &abs, &con).map_err(|e| parse_err(&options.corpus, e))?;

    let dir = &options.out_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write(&dir.join("stats.tsv"), &stats.to_tsv())?;
    write(&dir.join("stats.txt"), &stats.to_table("Corpus"))?;

    let mut summary = EvaluateSummary {
        stats,
        reference: None,
        comparison: None,
        fidelity: Vec::new(),
        missing_bow: 0,
    };

    if let Some(reference) = &options.reference {
        let right = stats_for(reference, &abs, &con)?;
        write(&dir.join("reference_stats.tsv"), &right.to_tsv())?;
        write(
            &dir.join("reference_stats.txt"),
            &right.to_table("Reference"),
        )?;
        let report = compare(&stats, &right);
        write(&dir.join("report.txt"), &report.to_table())?;
        write(&dir.join("report.tsv"), &report.to_tsv())?;
        summary.reference = Some(right);
        summary.comparison = Some(report);
    }

    if let Some(bow_path) = &options.bow {
        let bow = parse_bow(&read(bow_path)?).map_err(|e| parse_err(bow_path, e))?;
        let tracks = bow.by_id();
        let mut tsv = String::from("track_id\tcoverage\tfidelity\n");
        for (entry, doc) in entries.iter().zip(&docs) {
            let Some(track) = tracks.get(entry.track_id.as_str()) else {
                summary.missing_bow += 1;
                continue;
            };
            let coverage = bow_coverage(doc, track, &bow.vocab);
            let fidelity = frequency_fidelity(doc, track, &bow.vocab).ok();
            let _ = writeln!(
                tsv,
                "{}\t{}\t{}",
                entry.track_id,
                coverage,
                fidelity.map_or("n/a".to_string(), |f| f.to_string())
            );
            summary.fidelity.push(TrackFidelity {
                track_id: entry.track_id.clone(),
                coverage,
                fidelity,
            });
        }
        write(&dir.join("fidelity.tsv"), &tsv)?;
    }
    Ok(summary)
}

/// Compares two `stats.tsv` files and writes `report.txt`/`report.tsv`.
pub fn run_report(
    left: &Path,
    right: &Path,
    labels: (&str, &str),
    out_dir: &Path,
) -> Result<ComparisonReport, PipelineError> {
    let l = CorpusStats::from_tsv(&read(left)?).map_err(|e| parse_err(left, e))?;
    let r = CorpusStats::from_tsv(&read(right)?).map_err(|e| parse_err(right, e))?;
    let report = compare_labeled(&l, &r, labels.0, labels.1);
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write(&out_dir.join("report.txt"), &report.to_table())?;
    write(&out_dir.join("report.tsv"), &report.to_tsv())?;
    Ok(report)
}
