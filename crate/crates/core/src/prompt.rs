//! Generation prompt built from a joined record.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metadata::ReconstructionRecord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("record has no genre tags")]
    EmptyTags,
    #[error("record has an empty vocabulary")]
    EmptyVocabulary,
}

const SEPARATOR: &str = ", ";

/// The five values substituted into the template, kept for auditing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptFields {
    pub genre: String,
    pub artist: String,
    pub mood: String,
    pub title: String,
    pub vocabulary: String,
}

impl PromptFields {
    /// The instruction text. Fields are inserted verbatim.
    pub fn render(&self) -> String {
        format!(
            "Compose {} lyrics, in a style reminiscent of {} which represents a {} mood under the title of {} using the following vocabulary {}.",
            self.genre, self.artist, self.mood, self.title, self.vocabulary
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    pub track_id: String,
    pub fields: PromptFields,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptOptions {
    /// Keep only the N most frequent vocabulary words. Unlimited when `None`.
    pub max_vocabulary_words: Option<usize>,
}

pub fn genre_string<S: AsRef<str>>(tags: &[S]) -> Result<String, PromptError> {
    if tags.is_empty() {
        return Err(PromptError::EmptyTags);
    }
    Ok(join(tags))
}

pub fn vocabulary_string<S: AsRef<str>>(words: &[S]) -> Result<String, PromptError> {
    if words.is_empty() {
        return Err(PromptError::EmptyVocabulary);
    }
    Ok(join(words))
}

fn join<S: AsRef<str>>(items: &[S]) -> String {
    items
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(SEPARATOR)
}

pub fn build_prompt(record: &ReconstructionRecord) -> Result<Prompt, PromptError> {
    build_prompt_with(record, &PromptOptions::default())
}

pub fn build_prompt_with(
    record: &ReconstructionRecord,
    options: &PromptOptions,
) -> Result<Prompt, PromptError> {
    let words = match options.max_vocabulary_words {
        Some(cap) => &record.vocabulary[..cap.min(record.vocabulary.len())],
        None => &record.vocabulary[..],
    };
    let fields = PromptFields {
        genre: genre_string(&record.genres)?,
        artist: record.artist.clone(),
        mood: record.mood_label.clone(),
        title: record.title.clone(),
        vocabulary: vocabulary_string(words)?,
    };
    Ok(Prompt {
        text: fields.render(),
        track_id: record.track_id.clone(),
        fields,
    })
}

/// Marker preceding the vocabulary slot; the slot runs to the final period.
pub(crate) const VOCABULARY_MARKER: &str = " using the following vocabulary ";

/// Recovers the vocabulary words from rendered prompt text. Words never hold
/// whitespace, so the last marker occurrence starts the slot.
pub fn vocabulary_from_text(text: &str) -> Vec<&str> {
    let Some(pos) = text.rfind(VOCABULARY_MARKER) else {
        return Vec::new();
    };
    let slot = &text[pos + VOCABULARY_MARKER.len()..];
    let slot = slot.strip_suffix('.').unwrap_or(slot);
    slot.split(SEPARATOR).filter(|w| !w.is_empty()).collect()
}
