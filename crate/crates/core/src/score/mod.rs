//! Score ingestion: normalized note lists, vertical-event timelines and
//! element weight accumulation.

mod chordify;
mod midi;
mod musicxml;

pub use chordify::{accumulate_weights, chordify};
pub use midi::parse_midi;
pub use musicxml::parse_musicxml;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::Ql;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("empty input")]
    EmptyInput,
}

/// A single sounding note, normalized from any input format.
///
/// Onset and duration are in quarter lengths from the start of the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedNote {
    pub onset: Ql,
    pub duration: Ql,
    /// MIDI note number, 0..=127.
    pub pitch: u8,
    pub part_index: usize,
}

impl TimedNote {
    pub fn new(onset: Ql, duration: Ql, pitch: u8, part_index: usize) -> Self {
        debug_assert!(duration > Ql::from(0), "note duration must be positive");
        debug_assert!(onset >= Ql::from(0), "note onset must be non-negative");
        TimedNote { onset, duration, pitch, part_index }
    }

    pub fn end(&self) -> Ql {
        self.onset + self.duration
    }

    pub fn pitch_class(&self) -> u8 {
        self.pitch % 12
    }
}

/// One vertical slice of the score: the pitch classes sounding between
/// two consecutive onset/offset boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub onset: Ql,
    pub duration: Ql,
    /// Strictly increasing, each in 0..=11, never empty.
    pub pitch_classes: Vec<u8>,
}

impl Event {
    pub fn new(onset: Ql, duration: Ql, pitch_classes: Vec<u8>) -> Self {
        debug_assert!(!pitch_classes.is_empty());
        debug_assert!(pitch_classes.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(pitch_classes.iter().all(|&pc| pc < 12));
        Event { onset, duration, pitch_classes }
    }

    pub fn end(&self) -> Ql {
        self.onset + self.duration
    }
}

/// Ordered sequence of vertical events plus the measure grid.
///
/// Events are sorted by onset and never overlap; gaps between them are
/// rests. Measure numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Timeline {
    pub events: Vec<Event>,
    /// Measure number -> onset of its first beat, strictly increasing.
    pub measure_onsets: BTreeMap<u32, Ql>,
    pub total_duration: Ql,
}

impl Timeline {
    /// Onset of the given 1-based measure, or the total duration for any
    /// measure past the end (the "virtual" closing barline).
    pub fn measure_onset(&self, measure: u32) -> Ql {
        self.measure_onsets.get(&measure).copied().unwrap_or(self.total_duration)
    }

    pub fn measure_count(&self) -> u32 {
        self.measure_onsets.len() as u32
    }
}

/// Per-element cumulative durations and occurrence counts, the two node
/// weights of the graph builders.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementStats {
    /// Chord (sorted pc tuple) -> (total duration, occurrence count).
    pub chord_stats: BTreeMap<Vec<u8>, (Ql, u64)>,
    /// Pitch class -> (total duration, occurrence count).
    pub pc_stats: BTreeMap<u8, (Ql, u64)>,
    /// Duration value -> occurrence count. Rhythm elements carry a single
    /// weight, so no cumulative duration is kept here.
    pub rhythm_stats: BTreeMap<Ql, u64>,
    /// (chord, duration value) -> co-occurrence count.
    pub chord_rhythm_counts: BTreeMap<(Vec<u8>, Ql), u64>,
}

impl ElementStats {
    pub fn event_count(&self) -> u64 {
        self.chord_stats.values().map(|&(_, n)| n).sum()
    }

    pub fn total_duration(&self) -> Ql {
        self.chord_stats.values().map(|&(d, _)| d).sum()
    }
}

/// Result of parsing one input file: the note list plus the measure grid
/// and any non-fatal diagnostics (dangling note-ons, skipped grace notes).
#[derive(Debug, Clone, Default)]
pub struct ParsedScore {
    pub notes: Vec<TimedNote>,
    /// Measure number -> onset, taken from barlines or time signatures.
    pub measure_onsets: BTreeMap<u32, Ql>,
    pub total_duration: Ql,
    pub warnings: Vec<String>,
}

impl ParsedScore {
    /// Slice the note list into a timeline of vertical events, carrying
    /// the measure grid over.
    pub fn to_timeline(&self) -> Result<Timeline, ScoreError> {
        let mut timeline = chordify(&self.notes)?;
        timeline.measure_onsets = self.measure_onsets.clone();
        timeline.total_duration = self.total_duration.max(timeline.total_duration);
        Ok(timeline)
    }
}

/// Parse a score file by extension: `.xml`/`.musicxml` or `.mid`/`.midi`.
pub fn parse_file(path: &std::path::Path) -> Result<ParsedScore, ScoreError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ScoreError::MalformedFile(format!("{}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(ext) if ext == "xml" || ext == "musicxml" => parse_musicxml(&bytes),
        Some(ext) if ext == "mid" || ext == "midi" => parse_midi(&bytes),
        other => Err(ScoreError::UnsupportedFeature(format!(
            "unrecognized extension {other:?} for {}",
            path.display()
        ))),
    }
}
