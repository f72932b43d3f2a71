//! Python bindings. Errors surface as `lyrecon.LyreconError`, a subclass of
//! `ValueError`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyTuple;

use ::lyrecon as core;
use core::bow::{self, BowCorpus as CoreCorpus};
use core::eval;
use core::metadata::ReconstructionRecord;
use core::mood::{self, MoodPoint, MoodTable as CoreMoodTable};
use core::prompt::{self, Prompt as CorePrompt, PromptOptions};
use core::text::{self, LyricDoc as CoreDoc};

create_exception!(lyrecon, LyreconError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    LyreconError::new_err(e.to_string())
}

/// Angle of (valence, arousal) from the positive valence axis, in [0, 2π).
#[pyfunction]
fn mood_angle(valence: f64, arousal: f64) -> PyResult<f64> {
    mood::mood_angle(MoodPoint { valence, arousal }).map_err(err)
}

#[pyclass(module = "lyrecon", frozen)]
struct MoodTable {
    inner: CoreMoodTable,
}

#[pymethods]
impl MoodTable {
    /// The built-in eight-sector table, or one parsed from `text`.
    #[new]
    #[pyo3(signature = (text=None))]
    fn new(text: Option<&str>) -> PyResult<Self> {
        let inner = match text {
            Some(t) => CoreMoodTable::parse(t).map_err(err)?,
            None => CoreMoodTable::default(),
        };
        Ok(MoodTable { inner })
    }

    fn label(&self, theta: f64) -> String {
        self.inner.label(theta).to_string()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().into_iter().map(String::from).collect()
    }

    /// `(start, end, label)` with angles in radians.
    fn entries(&self) -> Vec<(f64, f64, String)> {
        self.inner
            .entries()
            .iter()
            .map(|e| (e.start, e.end, e.label.clone()))
            .collect()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.entries().len()
    }
}

#[pyclass(module = "lyrecon", frozen)]
struct Prompt {
    inner: CorePrompt,
}

#[pymethods]
impl Prompt {
    #[getter]
    fn text(&self) -> &str {
        &self.inner.text
    }

    #[getter]
    fn track_id(&self) -> &str {
        &self.inner.track_id
    }

    /// Slot values keyed by slot name.
    fn fields(&self) -> BTreeMap<&'static str, String> {
        let f = &self.inner.fields;
        BTreeMap::from([
            ("genre", f.genre.clone()),
            ("artist", f.artist.clone()),
            ("mood", f.mood.clone()),
            ("title", f.title.clone()),
            ("vocabulary", f.vocabulary.clone()),
        ])
    }

    fn __str__(&self) -> &str {
        &self.inner.text
    }

    fn __repr__(&self) -> String {
        format!("Prompt(track_id={:?})", self.inner.track_id)
    }
}

/// Prompt for one track. `mood` is a label; when omitted it is looked up
/// from valence and arousal in the built-in table.
#[pyfunction]
#[pyo3(signature = (track_id, artist, title, genres, vocabulary, mood=None, valence=None, arousal=None, max_vocabulary_words=None))]
#[allow(clippy::too_many_arguments)]
fn build_prompt(
    track_id: String,
    artist: String,
    title: String,
    genres: Vec<String>,
    vocabulary: Vec<String>,
    mood: Option<String>,
    valence: Option<f64>,
    arousal: Option<f64>,
    max_vocabulary_words: Option<usize>,
) -> PyResult<Prompt> {
    let (valence, arousal) = (valence.unwrap_or(f64::NAN), arousal.unwrap_or(f64::NAN));
    let (theta, mood_label) = match mood {
        Some(label) => (f64::NAN, label),
        None => {
            let theta = mood::mood_angle(MoodPoint { valence, arousal }).map_err(err)?;
            (theta, CoreMoodTable::default().label(theta).to_string())
        }
    };
    let record = ReconstructionRecord {
        track_id,
        artist,
        title,
        genres,
        valence,
        arousal,
        theta,
        mood_label,
        vocabulary,
    };
    let inner = prompt::build_prompt_with(
        &record,
        &PromptOptions {
            max_vocabulary_words,
        },
    )
    .map_err(err)?;
    Ok(Prompt { inner })
}

/// Offline lyrics for a prompt; same prompt, same text.
#[pyfunction]
fn mock_generate(prompt: &Prompt) -> String {
    core::generation::mock_generate(&prompt.inner)
}

#[pyfunction]
fn stem(word: &str) -> String {
    text::stem(word)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    text::tokenize(text)
}

/// Sliding windows of `n` tokens as tuples.
#[pyfunction]
fn ngrams<'py>(
    py: Python<'py>,
    tokens: Vec<String>,
    n: usize,
) -> PyResult<Vec<Bound<'py, PyTuple>>> {
    if n == 0 {
        return Err(err("n must be at least 1"));
    }
    text::ngrams(&tokens, n)
        .map(|w| PyTuple::new(py, w))
        .collect()
}

/// Percentage of tokens found in `lexicon`.
#[pyfunction]
fn lexicon_ratio(tokens: Vec<String>, lexicon: Vec<String>) -> PyResult<f64> {
    let lex = text::Lexicon::new("lexicon", lexicon).map_err(err)?;
    Ok(text::lexicon_ratio(&tokens, &lex))
}

#[pyclass(module = "lyrecon", frozen)]
struct LyricDoc {
    inner: CoreDoc,
}

#[pymethods]
impl LyricDoc {
    #[getter]
    fn lines(&self) -> Vec<String> {
        self.inner.lines().to_vec()
    }

    /// Lines of each blank-line-delimited section.
    #[getter]
    fn sections(&self) -> Vec<Vec<String>> {
        self.inner
            .sections()
            .iter()
            .map(|r| self.inner.lines()[r.clone()].to_vec())
            .collect()
    }

    #[getter]
    fn tokens(&self) -> Vec<String> {
        self.inner.tokens().map(String::from).collect()
    }

    #[getter]
    fn word_count(&self) -> usize {
        self.inner.word_count()
    }
}

#[pyfunction]
fn segment(text: &str) -> LyricDoc {
    LyricDoc {
        inner: text::segment(text),
    }
}

#[pyclass(module = "lyrecon", frozen)]
struct BowCorpus {
    inner: CoreCorpus,
}

impl BowCorpus {
    fn track(&self, track_id: &str) -> PyResult<&bow::TrackBow> {
        self.inner
            .tracks()
            .iter()
            .find(|t| t.track_id == track_id)
            .ok_or_else(|| err(format!("unknown track {track_id:?}")))
    }
}

#[pymethods]
impl BowCorpus {
    #[getter]
    fn vocabulary(&self) -> Vec<String> {
        self.inner.vocab.words().to_vec()
    }

    #[getter]
    fn track_ids(&self) -> Vec<String> {
        self.inner
            .tracks()
            .iter()
            .map(|t| t.track_id.clone())
            .collect()
    }

    /// Word to count for one track.
    fn counts(&self, track_id: &str) -> PyResult<BTreeMap<String, u32>> {
        let track = self.track(track_id)?;
        Ok(track
            .counts()
            .iter()
            .filter_map(|(&i, &c)| self.inner.vocab.word(i).map(|w| (w.to_string(), c)))
            .collect())
    }

    /// Words of one track, most frequent first.
    fn ordered_vocabulary(&self, track_id: &str) -> PyResult<Vec<String>> {
        self.inner
            .ordered_vocabulary(self.track(track_id)?)
            .map_err(err)
    }

    /// Fraction of the track's words found in `lyrics`, directly or by stem.
    fn coverage(&self, track_id: &str, lyrics: &str) -> PyResult<f64> {
        Ok(eval::bow_coverage(
            &text::segment(lyrics),
            self.track(track_id)?,
            &self.inner.vocab,
        ))
    }

    /// Spearman correlation of bag-of-words and lyric counts.
    fn fidelity(&self, track_id: &str, lyrics: &str) -> PyResult<f64> {
        eval::frequency_fidelity(
            &text::segment(lyrics),
            self.track(track_id)?,
            &self.inner.vocab,
        )
        .map_err(err)
    }

    fn serialize(&self) -> String {
        bow::serialize_bow(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.tracks().len()
    }
}

#[pyfunction]
fn parse_bow(text: &str) -> PyResult<BowCorpus> {
    Ok(BowCorpus {
        inner: bow::parse_bow(text).map_err(err)?,
    })
}

/// The nine corpus statistics, keyed by row name.
#[pyfunction]
fn corpus_stats(
    texts: Vec<String>,
    abstract_words: Vec<String>,
    concrete_words: Vec<String>,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let docs: Vec<CoreDoc> = texts.iter().map(|t| text::segment(t)).collect();
    let abs = text::Lexicon::new("abstract", abstract_words).map_err(err)?;
    let con = text::Lexicon::new("concrete", concrete_words).map_err(err)?;
    let stats = eval::corpus_stats(&docs, &abs, &con).map_err(err)?;
    Ok(eval::StatRow::ALL
        .iter()
        .map(|&r| (r.key(), stats.get(r)))
        .collect())
}

#[pymodule]
fn lyrecon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LyreconError", m.py().get_type::<LyreconError>())?;
    m.add_class::<MoodTable>()?;
    m.add_class::<Prompt>()?;
    m.add_class::<LyricDoc>()?;
    m.add_class::<BowCorpus>()?;
    m.add_function(wrap_pyfunction!(mood_angle, m)?)?;
    m.add_function(wrap_pyfunction!(build_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(mock_generate, m)?)?;
    m.add_function(wrap_pyfunction!(stem, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(ngrams, m)?)?;
    m.add_function(wrap_pyfunction!(lexicon_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(parse_bow, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_stats, m)?)?;
    Ok(())
}
