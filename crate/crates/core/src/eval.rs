//! Corpus statistics, bag-of-words fidelity and two-corpus comparison.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bow::{TrackBow, VocabTable};
use crate::text::{count_members, ratio_percent, stem, Lexicon, LyricDoc};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("corpus has no lyric sets")]
    EmptyCorpus,
    #[error("only {found} vocabulary word(s) occur in the text; at least 2 are needed")]
    InsufficientOverlap { found: usize },
    #[error("rank correlation is undefined when every count is equal")]
    ConstantRanks,
    #[error("stats file: {0}")]
    StatsFormat(String),
}

/// The nine corpus-level rows, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatRow {
    LyricSets,
    AvgWords,
    AvgLines,
    AvgSections,
    UniqueUnigrams,
    UniqueBigrams,
    UniqueTrigrams,
    AbstractRatio,
    ConcreteRatio,
}

impl StatRow {
    pub const ALL: [StatRow; 9] = [
        StatRow::LyricSets,
        StatRow::AvgWords,
        StatRow::AvgLines,
        StatRow::AvgSections,
        StatRow::UniqueUnigrams,
        StatRow::UniqueBigrams,
        StatRow::UniqueTrigrams,
        StatRow::AbstractRatio,
        StatRow::ConcreteRatio,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StatRow::LyricSets => "Total Count of Lyrics Sets",
            StatRow::AvgWords => "Average Word Count per Set",
            StatRow::AvgLines => "Average Line Count per Set",
            StatRow::AvgSections => "Average Section Count per Set",
            StatRow::UniqueUnigrams => "Total Count of Unique Unigrams",
            StatRow::UniqueBigrams => "Total Count of Unique Bigrams",
            StatRow::UniqueTrigrams => "Total Count of Unique Trigrams",
            StatRow::AbstractRatio => "Abstract Words Ratio",
            StatRow::ConcreteRatio => "Concrete Words Ratio",
        }
    }

    /// Machine-readable key used in TSV files.
    pub fn key(self) -> &'static str {
        match self {
            StatRow::LyricSets => "lyric_set_count",
            StatRow::AvgWords => "avg_words_per_set",
            StatRow::AvgLines => "avg_lines_per_set",
            StatRow::AvgSections => "avg_sections_per_set",
            StatRow::UniqueUnigrams => "unique_unigrams",
            StatRow::UniqueBigrams => "unique_bigrams",
            StatRow::UniqueTrigrams => "unique_trigrams",
            StatRow::AbstractRatio => "abstract_ratio",
            StatRow::ConcreteRatio => "concrete_ratio",
        }
    }

    pub fn is_count(self) -> bool {
        matches!(
            self,
            StatRow::LyricSets
                | StatRow::UniqueUnigrams
                | StatRow::UniqueBigrams
                | StatRow::UniqueTrigrams
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub lyric_set_count: u64,
    pub avg_words_per_set: f64,
    pub avg_lines_per_set: f64,
    pub avg_sections_per_set: f64,
    pub unique_unigrams: u64,
    pub unique_bigrams: u64,
    pub unique_trigrams: u64,
    /// Percentage of corpus tokens found in the abstract lexicon.
    pub abstract_ratio: f64,
    /// Percentage of corpus tokens found in the concrete lexicon.
    pub concrete_ratio: f64,
}

impl CorpusStats {
    pub fn get(&self, row: StatRow) -> f64 {
        match row {
            StatRow::LyricSets => self.lyric_set_count as f64,
            StatRow::AvgWords => self.avg_words_per_set,
            StatRow::AvgLines => self.avg_lines_per_set,
            StatRow::AvgSections => self.avg_sections_per_set,
            StatRow::UniqueUnigrams => self.unique_unigrams as f64,
            StatRow::UniqueBigrams => self.unique_bigrams as f64,
            StatRow::UniqueTrigrams => self.unique_trigrams as f64,
            StatRow::AbstractRatio => self.abstract_ratio,
            StatRow::ConcreteRatio => self.concrete_ratio,
        }
    }

    /// `row<TAB>value` lines, one per statistic.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("row\tvalue\n");
        for row in StatRow::ALL {
            let _ = writeln!(out, "{}\t{}", row.key(), format_tsv(row, self.get(row)));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, EvalError> {
        let mut values: HashMap<&str, f64> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 && line.starts_with("row\t") || line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once('\t').ok_or_else(|| {
                EvalError::StatsFormat(format!("line {}: expected key<TAB>value", i + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                EvalError::StatsFormat(format!("line {}: bad number {value:?}", i + 1))
            })?;
            values.insert(key.trim(), value);
        }
        let get = |row: StatRow| {
            values
                .get(row.key())
                .copied()
                .ok_or_else(|| EvalError::StatsFormat(format!("missing row {}", row.key())))
        };
        Ok(CorpusStats {
            lyric_set_count: get(StatRow::LyricSets)? as u64,
            avg_words_per_set: get(StatRow::AvgWords)?,
            avg_lines_per_set: get(StatRow::AvgLines)?,
            avg_sections_per_set: get(StatRow::AvgSections)?,
            unique_unigrams: get(StatRow::UniqueUnigrams)? as u64,
            unique_bigrams: get(StatRow::UniqueBigrams)? as u64,
            unique_trigrams: get(StatRow::UniqueTrigrams)? as u64,
            abstract_ratio: get(StatRow::AbstractRatio)?,
            concrete_ratio: get(StatRow::ConcreteRatio)?,
        })
    }

    /// Aligned two-column table.
    pub fn to_table(&self, label: &str) -> String {
        let rows: Vec<[String; 2]> = StatRow::ALL
            .iter()
            .map(|&r| [r.label().to_string(), format_display(r, self.get(r))])
            .collect();
        render_table(&["Item", label], &rows)
    }
}

fn format_tsv(row: StatRow, value: f64) -> String {
    if row.is_count() {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

fn format_display(row: StatRow, value: f64) -> String {
    if row.is_count() {
        format!("{}", value as i64)
    } else {
        format!("{value:.2}")
    }
}

fn render_table<const N: usize>(header: &[&str; N], rows: &[[String; N]]) -> String {
    let mut widths = header.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut text = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i == 0 {
                let _ = write!(text, "{cell:<width$}", width = widths[0]);
            } else {
                let _ = write!(text, "  {cell:>width$}", width = widths[i]);
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(rule.iter().map(String::as_str).collect());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

pub fn corpus_stats(
    docs: &[LyricDoc],
    abstract_lex: &Lexicon,
    concrete_lex: &Lexicon,
) -> Result<CorpusStats, EvalError> {
    if docs.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let n = docs.len() as f64;
    let words: usize = docs.iter().map(LyricDoc::word_count).sum();
    let lines: usize = docs.iter().map(|d| d.lines().len()).sum();
    let sections: usize = docs.iter().map(|d| d.sections().len()).sum();

    let unique = |order: usize| -> u64 {
        let grams: HashSet<&[String]> = docs.iter().flat_map(|d| d.ngrams(order)).collect();
        grams.len() as u64
    };

    let all_tokens = || docs.iter().flat_map(LyricDoc::tokens);
    let (abstract_hits, total) = count_members(all_tokens(), abstract_lex);
    let (concrete_hits, _) = count_members(all_tokens(), concrete_lex);

    Ok(CorpusStats {
        lyric_set_count: docs.len() as u64,
        avg_words_per_set: words as f64 / n,
        avg_lines_per_set: lines as f64 / n,
        avg_sections_per_set: sections as f64 / n,
        unique_unigrams: unique(1),
        unique_bigrams: unique(2),
        unique_trigrams: unique(3),
        abstract_ratio: ratio_percent(abstract_hits, total),
        concrete_ratio: ratio_percent(concrete_hits, total),
    })
}

/// Drops leading and trailing punctuation so "night," matches "night".
fn bare(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

fn track_words(track: &TrackBow, vocab: &VocabTable) -> Vec<(String, u32)> {
    track
        .counts()
        .iter()
        .filter_map(|(&i, &c)| vocab.word(i).map(|w| (w.to_lowercase(), c)))
        .collect()
}

/// Occurrences of each vocabulary word in the text. A token matches a word
/// when it equals it outright or its stem does.
fn doc_counts(doc: &LyricDoc, words: &HashSet<&str>) -> HashMap<String, u32> {
    let mut stems: HashMap<&str, String> = HashMap::new();
    let mut counts: HashMap<String, u32> = HashMap::new();
    for token in doc.tokens() {
        let token = bare(token);
        if token.is_empty() {
            continue;
        }
        let matched = if words.contains(token) {
            Some(token.to_string())
        } else {
            let s = stems.entry(token).or_insert_with(|| stem(token));
            words.contains(s.as_str()).then(|| s.clone())
        };
        if let Some(w) = matched {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Fraction of the track's vocabulary found in the text, directly or by stem.
pub fn bow_coverage(doc: &LyricDoc, track: &TrackBow, vocab: &VocabTable) -> f64 {
    let words = track_words(track, vocab);
    if words.is_empty() {
        return 0.0;
    }
    let set: HashSet<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
    let found = doc_counts(doc, &set);
    let covered = set.iter().filter(|w| found.contains_key(**w)).count();
    covered as f64 / set.len() as f64
}

/// Spearman correlation between bag-of-words counts and the text's counts,
/// over the vocabulary words that occur in the text.
pub fn frequency_fidelity(
    doc: &LyricDoc,
    track: &TrackBow,
    vocab: &VocabTable,
) -> Result<f64, EvalError> {
    let words = track_words(track, vocab);
    let set: HashSet<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
    let found = doc_counts(doc, &set);
    let (bow, text): (Vec<f64>, Vec<f64>) = words
        .iter()
        .filter_map(|(w, c)| found.get(w).map(|&d| (*c as f64, d as f64)))
        .unzip();
    if bow.len() < 2 {
        return Err(EvalError::InsufficientOverlap { found: bow.len() });
    }
    spearman(&bow, &text).ok_or(EvalError::ConstantRanks)
}

/// 1-based ranks with ties given their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks. `None` when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRow {
    pub row: StatRow,
    pub left: f64,
    pub right: f64,
    /// `left - right`
    pub abs_delta: f64,
    /// `(left - right) / right`; `None` when `right` is 0.
    pub rel_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub left_label: String,
    pub right_label: String,
    pub left: CorpusStats,
    pub right: CorpusStats,
    pub rows: Vec<DeltaRow>,
}

pub fn compare(left: &CorpusStats, right: &CorpusStats) -> ComparisonReport {
    compare_labeled(left, right, "Reconstructed", "Reference")
}

pub fn compare_labeled(
    left: &CorpusStats,
    right: &CorpusStats,
    left_label: &str,
    right_label: &str,
) -> ComparisonReport {
    let rows = StatRow::ALL
        .iter()
        .map(|&row| {
            let (l, r) = (left.get(row), right.get(row));
            let abs_delta = l - r;
            DeltaRow {
                row,
                left: l,
                right: r,
                abs_delta,
                rel_delta: (r != 0.0).then(|| abs_delta / r),
            }
        })
        .collect();
    ComparisonReport {
        left_label: left_label.to_string(),
        right_label: right_label.to_string(),
        left: *left,
        right: *right,
        rows,
    }
}

impl ComparisonReport {
    /// Aligned table: item, both corpora, absolute and relative delta.
    pub fn to_table(&self) -> String {
        let rows: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|d| {
                [
                    d.row.label().to_string(),
                    format_display(d.row, d.left),
                    format_display(d.row, d.right),
                    format_display(d.row, d.abs_delta),
                    d.rel_delta
                        .map_or("n/a".into(), |r| format!("{:+.2}%", 100.0 * r)),
                ]
            })
            .collect();
        render_table(
            &[
                "Item",
                &self.left_label,
                &self.right_label,
                "Abs. Delta",
                "Rel. Delta",
            ],
            &rows,
        )
    }

    /// `row, left, right, abs_delta, rel_delta` with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("row\tleft\tright\tabs_delta\trel_delta\n");
        for d in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                d.row.key(),
                format_tsv(d.row, d.left),
                format_tsv(d.row, d.right),
                format_tsv(d.row, d.abs_delta),
                d.rel_delta.map_or("n/a".into(), |r| format!("{r}")),
            );
        }
        out
    }
}
