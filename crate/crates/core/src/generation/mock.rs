//! Offline stand-in for a language model.

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Backend, CallError, DecodingParams};
use crate::prompt::{vocabulary_from_text, Prompt};

pub const MOCK_MODEL: &str = "mock";

/// Deterministic lyrics for a prompt.
///
/// Every vocabulary word of the prompt appears at least once, the text has
/// two or more sections separated by a single blank line, and the output
/// depends on nothing but the prompt text.
pub fn mock_generate(prompt: &Prompt) -> String {
    mock_lyrics(&prompt.text)
}

pub(crate) fn mock_lyrics(prompt_text: &str) -> String {
    let mut words: Vec<&str> = vocabulary_from_text(prompt_text);
    if words.is_empty() {
        words.push("la");
    }
    let seed: [u8; 32] = Sha256::digest(prompt_text.as_bytes()).into();
    let mut rng = ChaCha8Rng::from_seed(seed);
    words.shuffle(&mut rng);

    let mut lines: Vec<String> = Vec::new();
    let mut rest = &words[..];
    while !rest.is_empty() {
        let take = rng.random_range(3..=6).min(rest.len());
        lines.push(rest[..take].join(" "));
        rest = &rest[take..];
    }
    if lines.len() == 1 {
        // a lone line becomes verse and refrain
        lines.push(lines[0].clone());
    }

    let mut sections: Vec<&[String]> = Vec::new();
    let mut rest = &lines[..];
    while !rest.is_empty() {
        let take = rng.random_range(2..=4).min(rest.len());
        sections.push(&rest[..take]);
        rest = &rest[take..];
    }
    if sections.len() == 1 {
        let all = sections[0];
        let mid = all.len() / 2;
        sections = vec![&all[..mid], &all[mid..]];
    }

    sections
        .iter()
        .map(|s| s.join("\n"))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Backend that answers with [`mock_generate`] and never fails.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl Backend for MockBackend {
    fn model(&self) -> &str {
        MOCK_MODEL
    }

    fn complete(&self, prompt: &Prompt, _: &DecodingParams) -> Result<String, CallError> {
        Ok(mock_generate(prompt))
    }

    /// Fixed at the Unix epoch so mock runs are byte-reproducible.
    fn timestamp(&self) -> DateTime<Utc> {
        DateTime::UNIX_EPOCH
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{segment, tokenize};
    use proptest::prelude::*;

    fn text_with(words: &[&str]) -> String {
        format!(
            "Compose Pop lyrics, in a style reminiscent of A which represents a sad mood under the title of T using the following vocabulary {}.",
            words.join(", ")
        )
    }

    #[test]
    fn two_words() {
        let lyrics = mock_lyrics(&text_with(&["love", "night"]));
        let doc = segment(&lyrics);
        assert!(doc.sections().len() >= 2);
        let tokens = tokenize(&lyrics);
        assert!(tokens.contains(&"love".to_string()));
        assert!(tokens.contains(&"night".to_string()));
        assert!(!lyrics.contains("\n\n\n"));
    }

    #[test]
    fn deterministic() {
        let t = text_with(&["a", "b", "c", "d", "e", "f", "g"]);
        assert_eq!(mock_lyrics(&t), mock_lyrics(&t));
        assert_ne!(mock_lyrics(&t), mock_lyrics(&t.replace("sad", "happy")));
    }

    proptest! {
        #[test]
        fn contract_holds(words in proptest::collection::btree_set("[a-z']{1,9}", 1..120)) {
            let words: Vec<&str> = words.iter().map(String::as_str).collect();
            let lyrics = mock_lyrics(&text_with(&words));
            let doc = segment(&lyrics);
            prop_assert!(doc.sections().len() >= 2);
            prop_assert!(!lyrics.contains("\n\n\n"));
            prop_assert!(!lyrics.starts_with('\n') && !lyrics.ends_with('\n'));
            let tokens: std::collections::HashSet<String> = tokenize(&lyrics).into_iter().collect();
            for w in &words {
                prop_assert!(tokens.contains(*w), "{} missing", w);
            }
        }
    }
}
