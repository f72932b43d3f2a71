//! Seeded synthetic inputs for demos and tests.
//!
//! Every table covers the same track ids, so a join keeps all of them.

use std::collections::BTreeSet;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mood::DEFAULT_MOOD_TABLE;

const ONSETS: &[&str] = &[
    "b", "bl", "br", "c", "ch", "cr", "d", "dr", "f", "fl", "g", "gl", "h", "j", "k", "l", "m",
    "n", "p", "pl", "r", "s", "sh", "st", "t", "tr", "v", "w",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "oo", "ou"];
const CODAS: &[&str] = &["", "", "n", "r", "st", "t", "m", "ll", "ng", "ck", "d"];
const GENRES: &[&str] = &[
    "Pop",
    "Rock",
    "Experimental",
    "Jazz",
    "Folk",
    "Electronic",
    "Hip-Hop",
    "Country",
    "Metal",
    "Blues",
];
const TITLE_WORDS: &[&str] = &[
    "Time", "Is", "Running", "Out", "Night", "River", "Glass", "Heart", "Paper", "Fire", "Quiet",
    "Road", "Home", "Silver", "Rain",
];

/// Text of each input file.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub track_ids: Vec<String>,
    pub bow: String,
    pub mood_csv: String,
    pub genre_tsv: String,
    pub meta_csv: String,
    pub mood_table: String,
    pub abstract_lexicon: String,
    pub concrete_lexicon: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixturePaths {
    pub bow: PathBuf,
    pub mood: PathBuf,
    pub genre: PathBuf,
    pub meta: PathBuf,
    pub mood_table: PathBuf,
    pub abstract_lexicon: PathBuf,
    pub concrete_lexicon: PathBuf,
}

fn vocabulary(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut words = BTreeSet::new();
    while words.len() < size {
        let syllables = rng.random_range(1..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(NUCLEI.choose(rng).unwrap());
        }
        w.push_str(CODAS.choose(rng).unwrap());
        words.insert(w);
    }
    let mut words: Vec<String> = words.into_iter().collect();
    words.shuffle(rng);
    words
}

fn title(rng: &mut ChaCha8Rng, i: usize) -> String {
    let n = rng.random_range(1..=4);
    let mut t: Vec<&str> = (0..n).map(|_| *TITLE_WORDS.choose(rng).unwrap()).collect();
    t.dedup();
    let t = t.join(" ");
    // exercise CSV quoting now and then
    match i % 9 {
        0 => format!("{t}, Pt. {}", i % 4 + 1),
        4 => format!("\"{t}\""),
        _ => t,
    }
}

fn csv_text(header: [&str; 3], rows: &[[String; 3]]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Builds `tracks` aligned tracks from `seed`. The same arguments always give
/// the same text.
pub fn synthetic(tracks: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(&mut rng, 300);

    let mut ids = BTreeSet::new();
    while ids.len() < tracks {
        ids.insert(format!("TR{:016X}", rng.random::<u64>()));
    }
    let mut track_ids: Vec<String> = ids.into_iter().collect();
    track_ids.shuffle(&mut rng);

    let mut bow = String::from("# synthetic bag-of-words corpus\n%");
    bow.push_str(&vocab.join(","));
    bow.push('\n');
    let mut moods = Vec::new();
    let mut genres = String::from("# track_id<TAB>genre\n");
    let mut metas = Vec::new();
    for (i, id) in track_ids.iter().enumerate() {
        let distinct = rng.random_range(5..=25);
        let picked: BTreeSet<usize> = (0..distinct)
            .map(|_| rng.random_range(1..=vocab.len()))
            .collect();
        let mut pairs: Vec<String> = picked
            .iter()
            .map(|idx| format!("{idx}:{}", rng.random_range(1..=12)))
            .collect();
        pairs.shuffle(&mut rng);
        bow.push_str(&format!("{id},{},{}\n", 1_000_000 + i, pairs.join(",")));

        let (v, a): (f64, f64) = loop {
            let v = rng.random_range(-1.0..1.0);
            let a = rng.random_range(-1.0..1.0);
            if v != 0.0 || a != 0.0 {
                break (v, a);
            }
        };
        moods.push([id.clone(), format!("{v:.4}"), format!("{a:.4}")]);

        let tags: BTreeSet<&str> = (0..rng.random_range(1..=3))
            .map(|_| *GENRES.choose(&mut rng).unwrap())
            .collect();
        genres.push_str(id);
        for t in tags {
            genres.push('\t');
            genres.push_str(t);
        }
        genres.push('\n');

        metas.push([id.clone(), format!("Artist {}", i % 37), title(&mut rng, i)]);
    }
    moods.shuffle(&mut rng);
    metas.shuffle(&mut rng);

    let lexicon = |step: usize, offset: usize, name: &str| -> String {
        let mut out = format!("# synthetic {name} lexicon\n");
        for w in vocab.iter().skip(offset).step_by(step) {
            out.push_str(w);
            out.push('\n');
        }
        out
    };

    Fixture {
        track_ids,
        bow,
        mood_csv: csv_text(["track_id", "valence", "arousal"], &moods),
        genre_tsv: genres,
        meta_csv: csv_text(["track_id", "artist", "title"], &metas),
        mood_table: DEFAULT_MOOD_TABLE.to_string(),
        abstract_lexicon: lexicon(7, 0, "abstract"),
        concrete_lexicon: lexicon(5, 3, "concrete"),
    }
}

impl Fixture {
    /// Writes the files into `dir` under fixed names.
    pub fn write_to(&self, dir: &Path) -> io::Result<FixturePaths> {
        std::fs::create_dir_all(dir)?;
        let paths = FixturePaths {
            bow: dir.join("bow.txt"),
            mood: dir.join("mood.csv"),
            genre: dir.join("genre.tsv"),
            meta: dir.join("meta.csv"),
            mood_table: dir.join("mood_table.txt"),
            abstract_lexicon: dir.join("abstract.txt"),
            concrete_lexicon: dir.join("concrete.txt"),
        };
        for (path, text) in [
            (&paths.bow, &self.bow),
            (&paths.mood, &self.mood_csv),
            (&paths.genre, &self.genre_tsv),
            (&paths.meta, &self.meta_csv),
            (&paths.mood_table, &self.mood_table),
            (&paths.abstract_lexicon, &self.abstract_lexicon),
            (&paths.concrete_lexicon, &self.concrete_lexicon),
        ] {
            std::fs::write(path, text)?;
        }
        Ok(paths)
    }
}
