//! Mood, genre and artist/title tables, and their inner join with a
//! bag-of-words corpus.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bow::{ordered_vocabulary, BowCorpus};
use crate::mood::{mood_angle, MoodTable};

pub use crate::mood::MoodPoint;

#[derive(Debug, Error)]
pub enum MetadataError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("line {row}: column {column:?} value {value:?} is not a finite number")]
    NonNumericValue {
        row: u64,
        column: String,
        value: String,
    },
    #[error("line {row}: duplicate track id {id:?}")]
    DuplicateId { row: u64, id: String },
    #[error("line {row}: valence and arousal are both zero")]
    ZeroMoodVector { row: u64 },
    #[error("line {row}: empty {column:?}")]
    EmptyField { row: u64, column: String },
    #[error("line {line}: expected `track_id<TAB>genre`")]
    MalformedLine { line: usize },
    #[error("line {line}: empty genre")]
    EmptyGenre { line: usize },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl MetadataError {
    pub fn line(&self) -> Option<u64> {
        match self {
            MetadataError::NonNumericValue { row, .. }
            | MetadataError::DuplicateId { row, .. }
            | MetadataError::ZeroMoodVector { row }
            | MetadataError::EmptyField { row, .. } => Some(*row),
            MetadataError::MalformedLine { line } | MetadataError::EmptyGenre { line } => {
                Some(*line as u64)
            }
            MetadataError::Csv { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Header names of the mood table columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoodColumns {
    pub id: String,
    pub valence: String,
    pub arousal: String,
}

impl Default for MoodColumns {
    fn default() -> Self {
        MoodColumns {
            id: "track_id".into(),
            valence: "valence".into(),
            arousal: "arousal".into(),
        }
    }
}

/// Header names of the artist/title table columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaColumns {
    pub id: String,
    pub artist: String,
    pub title: String,
}

impl Default for MetaColumns {
    fn default() -> Self {
        MetaColumns {
            id: "track_id".into(),
            artist: "artist".into(),
            title: "title".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackMeta {
    pub track_id: String,
    pub artist: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenreTags {
    pub track_id: String,
    pub tags: Vec<String>,
}

/// One fully joined unit of work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRecord {
    pub track_id: String,
    pub artist: String,
    pub title: String,
    pub genres: Vec<String>,
    pub valence: f64,
    pub arousal: f64,
    pub theta: f64,
    pub mood_label: String,
    pub vocabulary: Vec<String>,
}

impl ReconstructionRecord {
    pub fn mood(&self) -> MoodPoint {
        MoodPoint {
            valence: self.valence,
            arousal: self.arousal,
        }
    }
}

/// Sizes of each source and of their intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JoinReport {
    pub bow: usize,
    pub mood: usize,
    pub genre: usize,
    pub meta: usize,
    pub joined: usize,
}

impl std::fmt::Display for JoinReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "bow: {}", self.bow)?;
        writeln!(f, "mood: {}", self.mood)?;
        writeln!(f, "genre: {}", self.genre)?;
        writeln!(f, "meta: {}", self.meta)?;
        writeln!(f, "joined: {}", self.joined)
    }
}

struct Table<R: Read> {
    reader: csv::Reader<R>,
    headers: csv::StringRecord,
}

impl<R: Read> Table<R> {
    fn open(reader: R, delimiter: u8) -> Result<Self, MetadataError> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = reader.headers().map_err(csv_error)?.clone();
        Ok(Table { reader, headers })
    }

    fn column(&self, name: &str) -> Result<usize, MetadataError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MetadataError::MissingColumn(name.to_string()))
    }

    /// Calls `f` with each data record and its 1-based line number.
    fn for_each(
        &mut self,
        mut f: impl FnMut(&csv::StringRecord, u64) -> Result<(), MetadataError>,
    ) -> Result<(), MetadataError> {
        let mut record = csv::StringRecord::new();
        while self.reader.read_record(&mut record).map_err(csv_error)? {
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(str::is_empty) {
                continue;
            }
            f(&record, line)?;
        }
        Ok(())
    }
}

fn csv_error(err: csv::Error) -> MetadataError {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => MetadataError::Io(e),
        kind => MetadataError::Csv {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn field<'r>(
    record: &'r csv::StringRecord,
    index: usize,
    column: &str,
    row: u64,
) -> Result<&'r str, MetadataError> {
    match record.get(index) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(MetadataError::EmptyField {
            row,
            column: column.to_string(),
        }),
    }
}

fn number(
    record: &csv::StringRecord,
    index: usize,
    column: &str,
    row: u64,
) -> Result<f64, MetadataError> {
    let raw = record.get(index).unwrap_or_default();
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(MetadataError::NonNumericValue {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

/// Reads a delimiter-separated valence/arousal table with a header row.
pub fn parse_mood_table<R: Read>(
    reader: R,
    columns: &MoodColumns,
    delimiter: u8,
) -> Result<BTreeMap<String, MoodPoint>, MetadataError> {
    let mut table = Table::open(reader, delimiter)?;
    let (id_col, val_col, aro_col) = (
        table.column(&columns.id)?,
        table.column(&columns.valence)?,
        table.column(&columns.arousal)?,
    );
    let mut out = BTreeMap::new();
    table.for_each(|record, row| {
        let id = field(record, id_col, &columns.id, row)?;
        let valence = number(record, val_col, &columns.valence, row)?;
        let arousal = number(record, aro_col, &columns.arousal, row)?;
        if valence == 0.0 && arousal == 0.0 {
            return Err(MetadataError::ZeroMoodVector { row });
        }
        if out
            .insert(id.to_string(), MoodPoint { valence, arousal })
            .is_some()
        {
            return Err(MetadataError::DuplicateId {
                row,
                id: id.to_string(),
            });
        }
        Ok(())
    })?;
    Ok(out)
}

/// Reads a delimiter-separated artist/title table with a header row.
pub fn parse_track_meta<R: Read>(
    reader: R,
    columns: &MetaColumns,
    delimiter: u8,
) -> Result<BTreeMap<String, TrackMeta>, MetadataError> {
    let mut table = Table::open(reader, delimiter)?;
    let (id_col, artist_col, title_col) = (
        table.column(&columns.id)?,
        table.column(&columns.artist)?,
        table.column(&columns.title)?,
    );
    let mut out = BTreeMap::new();
    table.for_each(|record, row| {
        let id = field(record, id_col, &columns.id, row)?;
        let meta = TrackMeta {
            track_id: id.to_string(),
            artist: field(record, artist_col, &columns.artist, row)?.to_string(),
            title: field(record, title_col, &columns.title, row)?.to_string(),
        };
        if out.insert(id.to_string(), meta).is_some() {
            return Err(MetadataError::DuplicateId {
                row,
                id: id.to_string(),
            });
        }
        Ok(())
    })?;
    Ok(out)
}

/// Reads headerless `track_id<TAB>genre` lines. A track may span several
/// lines; extra tab-separated fields are further genres. Tags keep file
/// order with repeats dropped.
pub fn parse_genre_table<R: Read>(reader: R) -> Result<BTreeMap<String, GenreTags>, MetadataError> {
    let mut out: BTreeMap<String, GenreTags> = BTreeMap::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        while fields.len() > 2 && fields.last() == Some(&"") {
            fields.pop();
        }
        if fields.len() < 2 || fields[0].is_empty() {
            return Err(MetadataError::MalformedLine { line: line_no });
        }
        if fields[1..].iter().any(|g| g.is_empty()) {
            return Err(MetadataError::EmptyGenre { line: line_no });
        }
        let entry = out
            .entry(fields[0].to_string())
            .or_insert_with(|| GenreTags {
                track_id: fields[0].to_string(),
                tags: Vec::new(),
            });
        for genre in &fields[1..] {
            if !entry.tags.iter().any(|t| t == genre) {
                entry.tags.push(genre.to_string());
            }
        }
    }
    Ok(out)
}

/// Inner join of the corpus with all three tables, sorted by track id.
pub fn join_records(
    bow: &BowCorpus,
    moods: &BTreeMap<String, MoodPoint>,
    genres: &BTreeMap<String, GenreTags>,
    metas: &BTreeMap<String, TrackMeta>,
    mood_table: &MoodTable,
) -> (Vec<ReconstructionRecord>, JoinReport) {
    let mut records: Vec<ReconstructionRecord> = bow
        .tracks()
        .iter()
        .filter_map(|track| {
            let id = track.track_id.as_str();
            let mood = *moods.get(id)?;
            let tags = genres.get(id)?;
            let meta = metas.get(id)?;
            // zero vectors are rejected at parse time; a hand-built map may still hold one
            let theta = mood_angle(mood).ok()?;
            let vocabulary = ordered_vocabulary(track, &bow.vocab).ok()?;
            if tags.tags.is_empty() || meta.artist.trim().is_empty() || meta.title.trim().is_empty()
            {
                return None;
            }
            Some(ReconstructionRecord {
                track_id: id.to_string(),
                artist: meta.artist.clone(),
                title: meta.title.clone(),
                genres: tags.tags.clone(),
                valence: mood.valence,
                arousal: mood.arousal,
                theta,
                mood_label: mood_table.label(theta).to_string(),
                vocabulary,
            })
        })
        .collect();
    records.sort_by(|a, b| a.track_id.cmp(&b.track_id));

    let report = JoinReport {
        bow: bow.tracks().len(),
        mood: moods.len(),
        genre: genres.len(),
        meta: metas.len(),
        joined: records.len(),
    };
    (records, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bow::parse_bow;
    use std::f64::consts::PI;

    const MUSE: &str = "TRSEKGD128F42B654D";

    #[test]
    fn mood_row_from_worked_example() {
        let text = format!("track_id,valence,arousal\n{MUSE}, -1.05, 0.34\n");
        let moods = parse_mood_table(text.as_bytes(), &MoodColumns::default(), b',').unwrap();
        assert_eq!(
            moods[MUSE],
            MoodPoint {
                valence: -1.05,
                arousal: 0.34
            }
        );
    }

    #[test]
    fn mood_errors() {
        let cols = MoodColumns::default();
        let err = parse_mood_table(
            "track_id,valence,arousal\nA,abc,1\n".as_bytes(),
            &cols,
            b',',
        )
        .unwrap_err();
        assert!(
            matches!(err, MetadataError::NonNumericValue { row: 2, .. }),
            "{err}"
        );
        let err = parse_mood_table(
            "track_id,valence,arousal\nA,0,0.0\n".as_bytes(),
            &cols,
            b',',
        )
        .unwrap_err();
        assert!(matches!(err, MetadataError::ZeroMoodVector { row: 2 }));
        let err = parse_mood_table(
            "track_id,valence,arousal\nA,1,1\nB,1,1\nA,2,2\n".as_bytes(),
            &cols,
            b',',
        )
        .unwrap_err();
        assert!(matches!(err, MetadataError::DuplicateId { row: 4, .. }));
        let err = parse_mood_table("track_id,valence\nA,1\n".as_bytes(), &cols, b',').unwrap_err();
        assert!(matches!(err, MetadataError::MissingColumn(ref c) if c == "arousal"));
        let err = parse_mood_table("track_id,valence,arousal\nA,1\n".as_bytes(), &cols, b',')
            .unwrap_err();
        assert!(matches!(err, MetadataError::NonNumericValue { row: 2, .. }));
        let err = parse_mood_table(
            "track_id,valence,arousal\nA,inf,1\n".as_bytes(),
            &cols,
            b',',
        )
        .unwrap_err();
        assert!(matches!(err, MetadataError::NonNumericValue { .. }));
    }

    #[test]
    fn custom_columns_and_delimiter() {
        let cols = MoodColumns {
            id: "MSD_track_id".into(),
            valence: "valence".into(),
            arousal: "arousal".into(),
        };
        let text = "dzr_sng_id\tMSD_track_id\tvalence\tarousal\n1\tT1\t0.5\t-0.25\n";
        let moods = parse_mood_table(text.as_bytes(), &cols, b'\t').unwrap();
        assert_eq!(
            moods["T1"],
            MoodPoint {
                valence: 0.5,
                arousal: -0.25
            }
        );
    }

    #[test]
    fn genre_lines() {
        let g = parse_genre_table(format!("{MUSE}\tExperimental\n").as_bytes()).unwrap();
        assert_eq!(g[MUSE].tags, ["Experimental"]);

        let g = parse_genre_table("A\tG1\nB\tX\nA\tG2\n".as_bytes()).unwrap();
        assert_eq!(g["A"].tags, ["G1", "G2"]);

        let g = parse_genre_table("# header\nA\tG1\r\nA\tG1\n\n".as_bytes()).unwrap();
        assert_eq!(g["A"].tags, ["G1"]);

        let g = parse_genre_table("A\tRock\tPop\t\n".as_bytes()).unwrap();
        assert_eq!(g["A"].tags, ["Rock", "Pop"]);

        assert!(matches!(
            parse_genre_table("A\tG\nB\n".as_bytes()).unwrap_err(),
            MetadataError::MalformedLine { line: 2 }
        ));
        assert!(matches!(
            parse_genre_table("A\t \n".as_bytes()).unwrap_err(),
            MetadataError::EmptyGenre { line: 1 }
        ));
    }

    #[test]
    fn track_meta_rows() {
        let cols = MetaColumns::default();
        let text = format!("track_id,artist,title\n{MUSE}, Muse, Time Is Running Out\n");
        let m = parse_track_meta(text.as_bytes(), &cols, b',').unwrap();
        assert_eq!(m[MUSE].artist, "Muse");
        assert_eq!(m[MUSE].title, "Time Is Running Out");

        let err = parse_track_meta(
            "track_id,artist,title\nA,Someone,\n".as_bytes(),
            &cols,
            b',',
        )
        .unwrap_err();
        assert!(
            matches!(err, MetadataError::EmptyField { row: 2, ref column } if column == "title")
        );

        let text = "track_id,artist,title\nA,\"Crosby, Stills & Nash\",\"Say \"\"Yes\"\", Now\"\n";
        let m = parse_track_meta(text.as_bytes(), &cols, b',').unwrap();
        assert_eq!(m["A"].artist, "Crosby, Stills & Nash");
        assert_eq!(m["A"].title, "Say \"Yes\", Now");
    }

    fn tables(
        mood_ids: &[&str],
        genre_ids: &[&str],
        meta_ids: &[&str],
    ) -> (
        BTreeMap<String, MoodPoint>,
        BTreeMap<String, GenreTags>,
        BTreeMap<String, TrackMeta>,
    ) {
        let moods = mood_ids
            .iter()
            .map(|id| {
                (
                    id.to_string(),
                    MoodPoint {
                        valence: -1.05,
                        arousal: 0.34,
                    },
                )
            })
            .collect();
        let genres = genre_ids
            .iter()
            .map(|id| {
                (
                    id.to_string(),
                    GenreTags {
                        track_id: id.to_string(),
                        tags: vec!["Rock".into()],
                    },
                )
            })
            .collect();
        let metas = meta_ids
            .iter()
            .map(|id| {
                (
                    id.to_string(),
                    TrackMeta {
                        track_id: id.to_string(),
                        artist: "X".into(),
                        title: "Y".into(),
                    },
                )
            })
            .collect();
        (moods, genres, metas)
    }

    #[test]
    fn join_is_an_intersection() {
        let bow = parse_bow("%love,night\nB,,1:1\nA,,1:1,2:4\n").unwrap();
        let (moods, genres, metas) = tables(&["A"], &["A", "B"], &["A", "B"]);
        let (records, report) = join_records(&bow, &moods, &genres, &metas, &MoodTable::default());
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.track_id, "A");
        assert_eq!(r.vocabulary, ["night", "love"]);
        assert!((r.theta / PI - 0.90).abs() < 0.005);
        assert_eq!(r.mood_label, "sad");
        assert_eq!(
            report,
            JoinReport {
                bow: 2,
                mood: 1,
                genre: 2,
                meta: 2,
                joined: 1
            }
        );
    }

    #[test]
    fn empty_intersection() {
        let bow = parse_bow("%love\nB,,1:1\n").unwrap();
        let (moods, genres, metas) = tables(&["A"], &["A"], &["A"]);
        let (records, report) = join_records(&bow, &moods, &genres, &metas, &MoodTable::default());
        assert!(records.is_empty());
        assert_eq!(report.joined, 0);
    }

    #[test]
    fn join_sorted_by_id() {
        let bow = parse_bow("%w\nC,,1:1\nA,,1:1\nB,,1:1\n").unwrap();
        let (moods, genres, metas) = tables(&["A", "B", "C"], &["A", "B", "C"], &["A", "B", "C"]);
        let (records, _) = join_records(&bow, &moods, &genres, &metas, &MoodTable::default());
        let ids: Vec<_> = records.iter().map(|r| r.track_id.as_str()).collect();
        assert_eq!(ids, ["A", "B", "C"]);
    }
}
