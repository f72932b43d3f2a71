use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::GenerationResult;

/// On-disk store of generation results, one JSON file per digest at
/// `<dir>/<first two hex chars>/<digest>`. The first write for a digest is
/// kept; later writes for the same digest are discarded.
#[derive(Debug, Clone)]
pub struct ResultCache {
    dir: PathBuf,
}

impl ResultCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResultCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, digest: &str) -> PathBuf {
        let shard = digest.get(..2).unwrap_or("__");
        self.dir.join(shard).join(digest)
    }

    /// Unreadable or corrupt entries count as misses.
    pub fn get(&self, digest: &str) -> io::Result<Option<GenerationResult>> {
        let path = self.path_for(digest);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        match serde_json::from_slice::<GenerationResult>(&bytes) {
            Ok(r) if r.prompt_digest == digest => Ok(Some(r)),
            Ok(_) => {
                log::warn!(
                    "cache entry {} holds a different digest; ignoring",
                    path.display()
                );
                Ok(None)
            }
            Err(e) => {
                log::warn!(
                    "cache entry {} is unreadable ({e}); ignoring",
                    path.display()
                );
                Ok(None)
            }
        }
    }

    /// Stores `result` unless an entry already exists, and returns whichever
    /// result is now on disk.
    pub fn put(&self, result: &GenerationResult) -> io::Result<GenerationResult> {
        let path = self.path_for(&result.prompt_digest);
        let shard = path.parent().expect("cache path has a shard directory");
        fs::create_dir_all(shard)?;

        let mut stored = result.clone();
        stored.cached = false;
        let mut tmp = tempfile::NamedTempFile::new_in(shard)?;
        serde_json::to_writer_pretty(&mut tmp, &stored)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;

        match tmp.persist_noclobber(&path) {
            Ok(_) => Ok(stored),
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => {
                match self.get(&result.prompt_digest)? {
                    Some(existing) => Ok(existing),
                    None => {
                        // existing entry is corrupt; replace it
                        e.file.persist(&path).map_err(|e| e.error)?;
                        Ok(stored)
                    }
                }
            }
            Err(e) => Err(e.error),
        }
    }
}
