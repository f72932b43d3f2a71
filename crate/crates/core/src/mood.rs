//! Valence/arousal angle and the circle partition that names it.
//!
//! Valence is the x axis and arousal the y axis. The angle is measured
//! counter-clockwise from positive valence and normalized into `[0, 2π)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bundled default table: eight octants around the circumplex.
pub const DEFAULT_MOOD_TABLE: &str = include_str!("../data/default_mood_table.txt");

// Boundaries within this distance (radians) are treated as touching.
const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoodPoint {
    pub valence: f64,
    pub arousal: f64,
}

impl MoodPoint {
    /// Rejects non-finite coordinates and the origin.
    pub fn new(valence: f64, arousal: f64) -> Result<Self, MoodError> {
        if !valence.is_finite() || !arousal.is_finite() {
            return Err(MoodError::NonFinite);
        }
        if valence == 0.0 && arousal == 0.0 {
            return Err(MoodError::ZeroMoodVector);
        }
        Ok(MoodPoint { valence, arousal })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MoodError {
    #[error("valence and arousal are both zero; the mood angle is undefined")]
    ZeroMoodVector,
    #[error("valence and arousal must be finite")]
    NonFinite,
    #[error("mood table entries {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("mood table leaves a gap at {at:.6} rad ({:.6}π)", at / PI)]
    Gap { at: f64 },
    #[error("mood table entry {0} has an invalid range")]
    OutOfRange(usize),
    #[error("mood table entry {0} has an empty label")]
    EmptyLabel(usize),
    #[error("mood table is empty")]
    Empty,
    #[error("mood table line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Angle of the mood point from the positive valence axis, in `[0, 2π)`.
pub fn mood_angle(mood: MoodPoint) -> Result<f64, MoodError> {
    let MoodPoint { valence, arousal } = mood;
    if !valence.is_finite() || !arousal.is_finite() {
        return Err(MoodError::NonFinite);
    }
    if valence == 0.0 && arousal == 0.0 {
        return Err(MoodError::ZeroMoodVector);
    }
    let raw = arousal.atan2(valence);
    // `+ 0.0` folds -0.0 into 0.0
    let theta = if raw < 0.0 { raw + TAU } else { raw + 0.0 };
    // a tiny negative angle rounds up to exactly 2π
    Ok(if theta >= TAU { 0.0 } else { theta })
}

/// One arc of the circle. Angles are in radians; `end > start` and the arc
/// may extend past 2π (or start below 0) to wrap around zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MoodArc {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

/// A validated partition of `[0, 2π)` into labelled half-open arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct MoodTable {
    entries: Vec<MoodArc>,
    // (normalized start, entry index), ascending by start
    starts: Vec<(f64, usize)>,
}

impl MoodTable {
    pub fn new(entries: Vec<MoodArc>) -> Result<Self, MoodError> {
        let starts = validate_mood_table(&entries)?;
        Ok(MoodTable { entries, starts })
    }

    pub fn entries(&self) -> &[MoodArc] {
        &self.entries
    }

    /// Distinct labels in table order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.label.as_str()) {
                out.push(&e.label);
            }
        }
        out
    }

    /// Label of the arc containing `theta`. Angles outside `[0, 2π)` are
    /// reduced modulo 2π first.
    pub fn label(&self, theta: f64) -> &str {
        let mut theta = theta.rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        let pos = self.starts.partition_point(|&(s, _)| s <= theta);
        // before the first start means we are inside the arc that wraps zero
        let slot = if pos == 0 {
            self.starts.len() - 1
        } else {
            pos - 1
        };
        &self.entries[self.starts[slot].1].label
    }

    /// Parses the text form: `start_over_pi end_over_pi label` per line,
    /// `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, MoodError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut number = |what: &str| -> Result<f64, MoodError> {
                let tok = parts.next().ok_or_else(|| MoodError::Parse {
                    line: i + 1,
                    message: format!("missing {what}"),
                })?;
                tok.parse::<f64>().map_err(|_| MoodError::Parse {
                    line: i + 1,
                    message: format!("{what} {tok:?} is not a number"),
                })
            };
            let start = number("start")?;
            let end = number("end")?;
            let label = parts.collect::<Vec<_>>().join(" ");
            entries.push(MoodArc {
                start: start * PI,
                end: end * PI,
                label,
            });
        }
        MoodTable::new(entries)
    }

    /// Renders the table back into its text form.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{} {} {}\n", e.start / PI, e.end / PI, e.label))
            .collect()
    }
}

impl Default for MoodTable {
    fn default() -> Self {
        MoodTable::parse(DEFAULT_MOOD_TABLE).expect("bundled mood table is valid")
    }
}

impl FromStr for MoodTable {
    type Err = MoodError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MoodTable::parse(s)
    }
}

impl fmt::Display for MoodTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Label of the arc containing `theta`.
pub fn mood_label(theta: f64, table: &MoodTable) -> &str {
    table.label(theta)
}

/// Checks that the arcs partition `[0, 2π)` exactly. Returns the normalized
/// start of each arc sorted ascending, paired with its entry index.
pub fn validate_mood_table(entries: &[MoodArc]) -> Result<Vec<(f64, usize)>, MoodError> {
    if entries.is_empty() {
        return Err(MoodError::Empty);
    }
    let mut arcs = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        if e.label.trim().is_empty() {
            return Err(MoodError::EmptyLabel(i));
        }
        let len = e.end - e.start;
        let in_range =
            |x: f64| x.is_finite() && (-TAU - BOUNDARY_EPS..=2.0 * TAU + BOUNDARY_EPS).contains(&x);
        if !in_range(e.start) || !in_range(e.end) || len <= BOUNDARY_EPS || len > TAU + BOUNDARY_EPS
        {
            return Err(MoodError::OutOfRange(i));
        }
        let mut start = e.start.rem_euclid(TAU);
        if TAU - start < BOUNDARY_EPS {
            start = 0.0;
        }
        arcs.push((start, start + len, i));
    }
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));

    for k in 0..arcs.len() {
        let (_, end, i) = arcs[k];
        // the successor of the last arc is the first one, one turn later
        let (next_start, j) = if k + 1 < arcs.len() {
            (arcs[k + 1].0, arcs[k + 1].2)
        } else {
            (arcs[0].0 + TAU, arcs[0].2)
        };
        if end > next_start + BOUNDARY_EPS {
            return Err(MoodError::Overlap(i.min(j), i.max(j)));
        }
        if end < next_start - BOUNDARY_EPS {
            return Err(MoodError::Gap {
                at: end.rem_euclid(TAU),
            });
        }
    }
    // a single arc shorter than the full turn is caught above as a gap
    Ok(arcs.into_iter().map(|(s, _, i)| (s, i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn arc(start_pi: f64, end_pi: f64, label: &str) -> MoodArc {
        MoodArc {
            start: start_pi * PI,
            end: end_pi * PI,
            label: label.into(),
        }
    }

    #[test]
    fn worked_example_angle() {
        let theta = mood_angle(MoodPoint::new(-1.05, 0.34).unwrap()).unwrap();
        assert!(
            (theta / PI - 0.90).abs() <= 0.005,
            "theta = {}π",
            theta / PI
        );
    }

    #[test]
    fn axis_and_diagonal_angles() {
        let angle = |v, a| {
            mood_angle(MoodPoint {
                valence: v,
                arousal: a,
            })
            .unwrap()
        };
        assert_eq!(angle(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(angle(0.0, 1.0), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(angle(-1.0, 0.0), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(angle(-1.0, -1.0), 5.0 * PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(angle(0.0, -1.0), 3.0 * PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn angle_edge_values_stay_in_range() {
        let tiny = MoodPoint {
            valence: 1.0,
            arousal: -1e-300,
        };
        let theta = mood_angle(tiny).unwrap();
        assert!((0.0..TAU).contains(&theta));
        let neg_zero = MoodPoint {
            valence: 2.0,
            arousal: -0.0,
        };
        assert!(mood_angle(neg_zero).unwrap().is_sign_positive());
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(MoodPoint::new(0.0, 0.0), Err(MoodError::ZeroMoodVector));
        let raw = MoodPoint {
            valence: 0.0,
            arousal: -0.0,
        };
        assert_eq!(mood_angle(raw), Err(MoodError::ZeroMoodVector));
        assert_eq!(MoodPoint::new(f64::NAN, 1.0), Err(MoodError::NonFinite));
    }

    #[test]
    fn default_table_labels() {
        let table = MoodTable::default();
        assert_eq!(table.entries().len(), 8);
        assert_eq!(table.label(0.0), "happy");
        assert_eq!(table.label(0.90 * PI), "sad");
        assert_eq!(table.label(TAU - 1e-12), "happy");
        assert_eq!(table.label(PI / 2.0), "energetic");
        assert_eq!(table.label(1.5 * PI), "sleepy");
        assert_eq!(
            table.labels(),
            [
                "happy",
                "excited",
                "energetic",
                "tense",
                "sad",
                "depressed",
                "sleepy",
                "relaxed"
            ]
        );
    }

    #[test]
    fn boundary_belongs_to_the_arc_it_starts() {
        let table = MoodTable::default();
        assert_eq!(table.label(PI / 8.0), "excited");
        assert_eq!(table.label(7.0 * PI / 8.0), "sad");
        let wrap_start = (-PI / 8.0).rem_euclid(TAU);
        assert_eq!(table.label(wrap_start), "happy");
        assert_eq!(table.label(wrap_start - 1e-9), "relaxed");
    }

    #[test]
    fn validation_cases() {
        MoodTable::new(vec![arc(0.0, 1.0, "a"), arc(1.0, 2.0, "b")]).unwrap();
        assert_eq!(
            MoodTable::new(vec![arc(0.0, 1.0, "a"), arc(1.0 - 0.1 / PI, 2.0, "b")]),
            Err(MoodError::Overlap(0, 1))
        );
        match MoodTable::new(vec![arc(0.0, 1.0, "a")]) {
            Err(MoodError::Gap { at }) => assert_abs_diff_eq!(at, PI, epsilon = 1e-12),
            other => panic!("expected gap, got {other:?}"),
        }
        assert_eq!(
            MoodTable::new(vec![arc(1.0, 0.5, "a")]),
            Err(MoodError::OutOfRange(0))
        );
        assert_eq!(
            MoodTable::new(vec![arc(0.0, 2.0, " ")]),
            Err(MoodError::EmptyLabel(0))
        );
        assert_eq!(MoodTable::new(vec![]), Err(MoodError::Empty));
        // one full-turn arc is a valid partition
        let whole = MoodTable::new(vec![arc(-1.0, 1.0, "any")]).unwrap();
        assert_eq!(whole.label(3.0), "any");
    }

    #[test]
    fn parse_text_form() {
        let table: MoodTable = "# two halves\n0 1 upper half\n1 2 lower\n".parse().unwrap();
        assert_eq!(table.label(0.5), "upper half");
        assert_eq!(table.label(4.0), "lower");
        assert!(matches!(
            MoodTable::parse("0 x a"),
            Err(MoodError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            MoodTable::parse("0"),
            Err(MoodError::Parse { .. })
        ));
        let again = MoodTable::parse(&table.to_text()).unwrap();
        assert_eq!(again, table);
    }

    proptest! {
        #[test]
        fn angle_is_scale_invariant(
            v in -1e3f64..1e3, a in -1e3f64..1e3, c in 1e-3f64..1e3
        ) {
            prop_assume!(v.abs() > 1e-9 || a.abs() > 1e-9);
            let base = mood_angle(MoodPoint { valence: v, arousal: a }).unwrap();
            let scaled = mood_angle(MoodPoint { valence: c * v, arousal: c * a }).unwrap();
            let diff = (base - scaled).abs();
            // angles just either side of zero are the same direction
            prop_assert!(diff <= 1e-12 || (TAU - diff) <= 1e-12, "{base} vs {scaled}");
            prop_assert!((0.0..TAU).contains(&base));
        }

        #[test]
        fn every_angle_gets_a_default_label(theta in 0.0f64..TAU) {
            let table = MoodTable::default();
            let label = table.label(theta);
            let hits = table
                .entries()
                .iter()
                .filter(|e| (theta - e.start).rem_euclid(TAU) < e.end - e.start)
                .count();
            prop_assert_eq!(hits, 1);
            prop_assert!(table.labels().contains(&label));
        }
    }
}
