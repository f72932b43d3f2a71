//! Bag-of-words corpus files in the musiXmatch distribution layout.
//!
//! ```text
//! # comment lines start with '#'
//! %i,the,you,love,...
//! TRAAAAV128F421A322,4623710,1:6,2:4,3:2,4:2
//! ```
//!
//! One `%` line holds the shared vocabulary (1-based indices), and every data
//! line is `track_id,source_id,idx:cnt,...`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{self, Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BowError {
    #[error("line {line}: data line before the '%' vocabulary header")]
    MissingVocabHeader { line: usize },
    #[error("no '%' vocabulary header found")]
    NoVocabHeader,
    #[error("line {line}: second '%' vocabulary header")]
    DuplicateVocabHeader { line: usize },
    #[error("invalid vocabulary word {word:?}")]
    InvalidWord { word: String },
    #[error("duplicate vocabulary word {word:?}")]
    DuplicateWord { word: String },
    #[error("line {line}: duplicate track id {track_id:?}")]
    DuplicateTrackId { line: usize, track_id: String },
    #[error("line {line}: word index {index} outside vocabulary of {vocab_size} words")]
    IndexOutOfRange {
        line: usize,
        index: u64,
        vocab_size: usize,
    },
    #[error("line {line}: malformed pair {pair:?}")]
    MalformedPair { line: usize, pair: String },
    #[error("line {line}: count must be a positive integer, got {count:?}")]
    NonPositiveCount { line: usize, count: String },
    #[error("line {line}: word index {index} listed twice")]
    DuplicateIndex { line: usize, index: u32 },
    #[error("line {line}: missing track id or word counts")]
    MalformedTrack { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl BowError {
    /// 1-based line number of the offending line, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            BowError::MissingVocabHeader { line }
            | BowError::DuplicateVocabHeader { line }
            | BowError::DuplicateTrackId { line, .. }
            | BowError::IndexOutOfRange { line, .. }
            | BowError::MalformedPair { line, .. }
            | BowError::NonPositiveCount { line, .. }
            | BowError::DuplicateIndex { line, .. }
            | BowError::MalformedTrack { line } => Some(*line),
            _ => None,
        }
    }
}

/// Shared, pre-stemmed vocabulary. Index 1 is the first word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabTable {
    words: Vec<String>,
}

fn valid_word(word: &str) -> bool {
    !word.is_empty()
        && !word
            .chars()
            .any(|c| c == ',' || c == ':' || c.is_whitespace())
}

impl VocabTable {
    pub fn new<I, S>(words: I) -> Result<Self, BowError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        let mut seen = HashSet::with_capacity(words.len());
        for word in &words {
            if !valid_word(word) {
                return Err(BowError::InvalidWord { word: word.clone() });
            }
            if !seen.insert(word.as_str()) {
                return Err(BowError::DuplicateWord { word: word.clone() });
            }
        }
        Ok(VocabTable { words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Word at a 1-based index.
    pub fn word(&self, index: u32) -> Option<&str> {
        let i = (index as usize).checked_sub(1)?;
        self.words.get(i).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Sparse word-index to count map for one track.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackBow {
    pub track_id: String,
    pub source_id: String,
    counts: BTreeMap<u32, u32>,
}

impl TrackBow {
    /// Builds a track, rejecting empty maps, zero counts and zero indices.
    /// Indices are checked against a vocabulary when the track joins a corpus.
    pub fn new(
        track_id: impl Into<String>,
        source_id: impl Into<String>,
        counts: BTreeMap<u32, u32>,
    ) -> Result<Self, BowError> {
        let track_id = track_id.into();
        let source_id = source_id.into();
        if counts.is_empty() || !valid_id(&track_id) || source_id.contains([',', '\n', '\r']) {
            return Err(BowError::MalformedTrack { line: 0 });
        }
        if let Some((&index, _)) = counts.iter().find(|(&i, _)| i == 0) {
            return Err(BowError::IndexOutOfRange {
                line: 0,
                index: index.into(),
                vocab_size: 0,
            });
        }
        if counts.values().any(|&c| c == 0) {
            return Err(BowError::NonPositiveCount {
                line: 0,
                count: "0".into(),
            });
        }
        Ok(TrackBow {
            track_id,
            source_id,
            counts,
        })
    }

    /// Word index to count, ascending by index.
    pub fn counts(&self) -> &BTreeMap<u32, u32> {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn max_index(&self) -> u32 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}

fn valid_id(id: &str) -> bool {
    // a leading '#' or '%' would read back as a comment or a header
    !id.is_empty() && !id.starts_with(['#', '%']) && !id.contains([',', '\n', '\r'])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BowCorpus {
    pub vocab: VocabTable,
    tracks: Vec<TrackBow>,
}

impl BowCorpus {
    pub fn new(vocab: VocabTable, tracks: Vec<TrackBow>) -> Result<Self, BowError> {
        let mut seen = HashSet::with_capacity(tracks.len());
        for track in &tracks {
            if !seen.insert(track.track_id.as_str()) {
                return Err(BowError::DuplicateTrackId {
                    line: 0,
                    track_id: track.track_id.clone(),
                });
            }
            let max = track.max_index();
            if max as usize > vocab.len() {
                return Err(BowError::IndexOutOfRange {
                    line: 0,
                    index: max.into(),
                    vocab_size: vocab.len(),
                });
            }
        }
        Ok(BowCorpus { vocab, tracks })
    }

    pub fn tracks(&self) -> &[TrackBow] {
        &self.tracks
    }

    pub fn by_id(&self) -> HashMap<&str, &TrackBow> {
        self.tracks
            .iter()
            .map(|t| (t.track_id.as_str(), t))
            .collect()
    }

    /// Frequency-ordered vocabulary of one track.
    pub fn ordered_vocabulary(&self, track: &TrackBow) -> Result<Vec<String>, BowError> {
        ordered_vocabulary(track, &self.vocab)
    }
}

/// Reads a corpus from any byte stream. Input must be UTF-8.
pub fn load_bow<R: Read>(mut reader: R) -> Result<BowCorpus, BowError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_bow(&text)
}

pub fn parse_bow(text: &str) -> Result<BowCorpus, BowError> {
    let mut vocab: Option<VocabTable> = None;
    let mut tracks = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix('%') {
            if vocab.is_some() {
                return Err(BowError::DuplicateVocabHeader { line: line_no });
            }
            vocab = Some(VocabTable::new(header.split(','))?);
            continue;
        }
        let Some(vocab) = vocab.as_ref() else {
            return Err(BowError::MissingVocabHeader { line: line_no });
        };
        let track = parse_track_line(line, line_no, vocab)?;
        if !seen.insert(track.track_id.clone()) {
            return Err(BowError::DuplicateTrackId {
                line: line_no,
                track_id: track.track_id,
            });
        }
        tracks.push(track);
    }

    let vocab = vocab.ok_or(BowError::NoVocabHeader)?;
    Ok(BowCorpus { vocab, tracks })
}

fn parse_track_line(line: &str, line_no: usize, vocab: &VocabTable) -> Result<TrackBow, BowError> {
    let mut fields = line.split(',');
    let track_id = fields.next().unwrap_or_default();
    let source_id = fields.next();
    let (Some(source_id), false) = (source_id, track_id.is_empty()) else {
        return Err(BowError::MalformedTrack { line: line_no });
    };

    let mut counts = BTreeMap::new();
    for pair in fields {
        let malformed = || BowError::MalformedPair {
            line: line_no,
            pair: pair.to_string(),
        };
        let (idx, cnt) = pair.split_once(':').ok_or_else(malformed)?;
        let index: u64 = idx.trim().parse().map_err(|_| malformed())?;
        let count: i64 = cnt.trim().parse().map_err(|_| malformed())?;
        if index == 0 || index > vocab.len() as u64 {
            return Err(BowError::IndexOutOfRange {
                line: line_no,
                index,
                vocab_size: vocab.len(),
            });
        }
        if count < 1 || count > u32::MAX as i64 {
            return Err(BowError::NonPositiveCount {
                line: line_no,
                count: cnt.to_string(),
            });
        }
        let index = index as u32;
        if counts.insert(index, count as u32).is_some() {
            return Err(BowError::DuplicateIndex {
                line: line_no,
                index,
            });
        }
    }
    if counts.is_empty() {
        return Err(BowError::MalformedTrack { line: line_no });
    }

    Ok(TrackBow {
        track_id: track_id.to_string(),
        source_id: source_id.to_string(),
        counts,
    })
}

/// Canonical text form: LF endings, no comments, pairs in ascending index order.
pub fn serialize_bow(corpus: &BowCorpus) -> String {
    let mut out = String::new();
    out.push('%');
    out.push_str(&corpus.vocab.words.join(","));
    out.push('\n');
    for track in &corpus.tracks {
        out.push_str(&track.track_id);
        out.push(',');
        out.push_str(&track.source_id);
        for (index, count) in &track.counts {
            let _ = write!(out, ",{index}:{count}");
        }
        out.push('\n');
    }
    out
}

pub fn write_bow<W: Write>(corpus: &BowCorpus, mut writer: W) -> io::Result<()> {
    writer.write_all(serialize_bow(corpus).as_bytes())
}

/// Words of a track sorted by count, most frequent first. Equal counts keep
/// ascending vocabulary-index order.
pub fn ordered_vocabulary(track: &TrackBow, vocab: &VocabTable) -> Result<Vec<String>, BowError> {
    let mut entries: Vec<(u32, u32)> = track.counts.iter().map(|(&i, &c)| (i, c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    entries
        .into_iter()
        .map(|(index, _)| {
            vocab
                .word(index)
                .map(str::to_string)
                .ok_or(BowError::IndexOutOfRange {
                    line: 0,
                    index: index.into(),
                    vocab_size: vocab.len(),
                })
        })
        .collect()
}
