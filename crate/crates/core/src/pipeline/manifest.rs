//! Append-only run manifest.
//!
//! The first line records what the run was started with; every later line is
//! one state change of one track. A torn final line (crash mid-write) is
//! ignored on load.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ManifestEvent {
    Start {
        config_digest: String,
        input_digests: BTreeMap<String, String>,
    },
    Done {
        track_id: String,
    },
    Failed {
        track_id: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "reason", rename_all = "snake_case")]
pub enum TrackStatus {
    Pending,
    Done,
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatusCounts {
    pub pending: usize,
    pub done: usize,
    pub failed: usize,
}

/// In-memory view of a manifest file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub config_digest: String,
    pub input_digests: BTreeMap<String, String>,
    pub status: BTreeMap<String, TrackStatus>,
}

impl RunManifest {
    pub fn new(config_digest: String, input_digests: BTreeMap<String, String>) -> Self {
        RunManifest {
            config_digest,
            input_digests,
            status: BTreeMap::new(),
        }
    }

    pub fn status(&self, track_id: &str) -> TrackStatus {
        self.status
            .get(track_id)
            .cloned()
            .unwrap_or(TrackStatus::Pending)
    }

    pub fn is_done(&self, track_id: &str) -> bool {
        matches!(self.status.get(track_id), Some(TrackStatus::Done))
    }

    pub fn counts<'a>(&self, track_ids: impl IntoIterator<Item = &'a str>) -> StatusCounts {
        let mut counts = StatusCounts::default();
        for id in track_ids {
            match self.status(id) {
                TrackStatus::Pending => counts.pending += 1,
                TrackStatus::Done => counts.done += 1,
                TrackStatus::Failed(_) => counts.failed += 1,
            }
        }
        counts
    }

    fn apply(&mut self, event: ManifestEvent) {
        match event {
            ManifestEvent::Start { .. } => {}
            ManifestEvent::Done { track_id } => {
                self.status.insert(track_id, TrackStatus::Done);
            }
            ManifestEvent::Failed { track_id, reason } => {
                self.status.insert(track_id, TrackStatus::Failed(reason));
            }
        }
    }

    /// Reads a manifest. `Ok(None)` when the file does not exist.
    pub fn load(path: &Path) -> io::Result<Option<RunManifest>> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut manifest: Option<RunManifest> = None;
        let lines: Vec<&str> = text.split_inclusive('\n').collect();
        for (i, line) in lines.iter().enumerate() {
            let complete = line.ends_with('\n');
            let event = match serde_json::from_str::<ManifestEvent>(line.trim_end()) {
                Ok(ev) if complete => ev,
                // a line without its newline can only be the torn last one
                _ if !complete => break,
                Ok(_) | Err(_) => {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("{}: line {} is not a manifest event", path.display(), i + 1),
                    ))
                }
            };
            match (&mut manifest, event) {
                (
                    None,
                    ManifestEvent::Start {
                        config_digest,
                        input_digests,
                    },
                ) => {
                    manifest = Some(RunManifest::new(config_digest, input_digests));
                }
                (Some(m), ev @ (ManifestEvent::Done { .. } | ManifestEvent::Failed { .. })) => {
                    m.apply(ev)
                }
                _ => {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("{}: line {} is out of order", path.display(), i + 1),
                    ))
                }
            }
        }
        Ok(manifest)
    }
}

/// Appends JSON lines to a file, syncing after each line. Used for the
/// manifest and for the journal of finished outputs.
pub struct JsonlAppender {
    file: File,
    path: PathBuf,
}

impl JsonlAppender {
    /// Opens for appending. A torn trailing line is cut off first so new
    /// events start on a fresh line.
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Ok(text) = std::fs::read(path) {
            if !text.is_empty() && !text.ends_with(b"\n") {
                let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
                OpenOptions::new()
                    .write(true)
                    .open(path)?
                    .set_len(keep as u64)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(JsonlAppender {
            file,
            path: path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        let mut line = serde_json::to_string(value)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()
    }
}
