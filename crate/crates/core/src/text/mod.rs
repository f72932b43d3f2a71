//! Measurement primitives: whitespace tokens, lines and sections, line-local
//! n-grams, stemming and lexicon ratios.
//!
//! A token is a whitespace-separated word, lowercased, with punctuation kept.
//! Sections are runs of non-blank lines separated by blank lines. N-gram
//! windows never cross a line boundary.

mod stem;

use std::collections::HashSet;
use std::ops::Range;

use thiserror::Error;

pub use stem::stem;

#[derive(Debug, Error, PartialEq)]
pub enum TextError {
    #[error("lexicon {0:?} has no words")]
    EmptyLexicon(String),
}

/// Splits on runs of whitespace and lowercases each token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Sliding windows of `n` tokens. Empty for `n == 0` or short input.
pub fn ngrams<T>(tokens: &[T], n: usize) -> impl Iterator<Item = &[T]> {
    // windows(0) panics, so n == 0 yields a window size no slice can satisfy
    let size = if n == 0 { tokens.len() + 1 } else { n };
    tokens.windows(size)
}

/// A lyric text split into lines, sections and tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct LyricDoc {
    raw: String,
    lines: Vec<String>,
    sections: Vec<Range<usize>>,
    tokens: Vec<Vec<String>>,
}

impl LyricDoc {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Non-blank lines, trailing whitespace removed.
    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    /// Line-index ranges, one per blank-line-delimited block.
    pub fn sections(&self) -> &[Range<usize>] {
        &self.sections
    }

    /// Tokens of each line.
    pub fn line_tokens(&self) -> &[Vec<String>] {
        &self.tokens
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().flatten().map(String::as_str)
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().map(Vec::len).sum()
    }

    /// All n-grams of the document, each taken within a single line.
    pub fn ngrams(&self, n: usize) -> impl Iterator<Item = &[String]> {
        self.tokens.iter().flat_map(move |line| ngrams(line, n))
    }
}

pub fn segment(text: &str) -> LyricDoc {
    let mut lines = Vec::new();
    let mut sections = Vec::new();
    let mut section_start: Option<usize> = None;

    for line in text.lines() {
        if line.trim().is_empty() {
            if let Some(start) = section_start.take() {
                sections.push(start..lines.len());
            }
            continue;
        }
        section_start.get_or_insert(lines.len());
        lines.push(line.trim_end().to_string());
    }
    if let Some(start) = section_start {
        sections.push(start..lines.len());
    }

    let tokens = lines.iter().map(|l| tokenize(l)).collect();
    LyricDoc {
        raw: text.to_string(),
        lines,
        sections,
        tokens,
    }
}

/// A named word list, e.g. abstract or concrete words.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    name: String,
    words: HashSet<String>,
}

impl Lexicon {
    pub fn new<I, S>(name: impl Into<String>, words: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let name = name.into();
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(TextError::EmptyLexicon(name));
        }
        Ok(Lexicon { name, words })
    }

    /// One word per line; `#` starts a comment line.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, TextError> {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Lexicon::new(name, words)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

/// Percentage of tokens that belong to the lexicon; 0 for no tokens.
pub fn lexicon_ratio<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> f64 {
    let (hits, total) = count_members(tokens.iter().map(AsRef::as_ref), lexicon);
    ratio_percent(hits, total)
}

pub(crate) fn count_members<'a>(
    tokens: impl Iterator<Item = &'a str>,
    lexicon: &Lexicon,
) -> (usize, usize) {
    tokens.fold((0, 0), |(hits, total), t| {
        (hits + usize::from(lexicon.contains(t)), total + 1)
    })
}

pub(crate) fn ratio_percent(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * hits as f64 / total as f64
    }
}
