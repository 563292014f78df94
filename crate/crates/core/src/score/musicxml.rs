//! Uncompressed partwise MusicXML ingestion.
//!
//! Supported subset: parts, measures, notes (pitch, duration, chord flag,
//! tie, rest), divisions, time signatures, backup/forward. Grace notes
//! are skipped with a warning. Ties are merged into single notes before
//! chordification. Measure numbering is sequential and 1-based.

use std::collections::BTreeMap;

use roxmltree::{Document, Node};

use crate::score::{ParsedScore, ScoreError, TimedNote};
use crate::Ql;

pub fn parse_musicxml(bytes: &[u8]) -> Result<ParsedScore, ScoreError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| ScoreError::MalformedFile(format!("not valid UTF-8: {e}")))?;
    let doc = Document::parse(text)
        .map_err(|e| ScoreError::MalformedFile(format!("XML parse error: {e}")))?;
    let root = doc.root_element();
    if root.tag_name().name() != "score-partwise" {
        return Err(ScoreError::UnsupportedFeature(root.tag_name().name().to_string()));
    }

    let mut score = ParsedScore::default();
    let mut max_end = Ql::from(0);
    for (part_index, part) in root
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "part")
        .enumerate()
    {
        let end = parse_part(part, part_index, &mut score)?;
        max_end = max_end.max(end);
    }
    if score.notes.is_empty() && score.measure_onsets.is_empty() {
        return Err(ScoreError::MalformedFile("no parts or measures found".into()));
    }
    score.notes.sort_by(|a, b| {
        (a.onset, a.part_index, a.pitch).cmp(&(b.onset, b.part_index, b.pitch))
    });
    score.total_duration = score.total_duration.max(max_end);
    Ok(score)
}

struct PartState {
    divisions: i64,
    /// Nominal measure length from the current time signature.
    nominal_measure: Ql,
    cursor: Ql,
    /// Onset of the most recent non-chord note, for `<chord/>` stacking.
    last_onset: Ql,
    last_duration: Ql,
    /// (voice, midi pitch) -> index into `score.notes` of an open tie.
    open_ties: BTreeMap<(String, u8), usize>,
}

fn parse_part(
    part: Node,
    part_index: usize,
    score: &mut ParsedScore,
) -> Result<Ql, ScoreError> {
    let mut state = PartState {
        divisions: 1,
        nominal_measure: Ql::from(4),
        cursor: Ql::from(0),
        last_onset: Ql::from(0),
        last_duration: Ql::from(0),
        open_ties: BTreeMap::new(),
    };

    for (measure_index, measure) in part
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "measure")
        .enumerate()
    {
        let measure_start = state.cursor;
        if part_index == 0 {
            score.measure_onsets.insert(measure_index as u32 + 1, measure_start);
        }
        let mut max_pos = measure_start;

        for child in measure.children().filter(|n| n.is_element()) {
            match child.tag_name().name() {
                "attributes" => {
                    if let Some(d) = child_text_i64(child, "divisions") {
                        if d <= 0 {
                            return Err(ScoreError::MalformedFile(
                                "divisions must be positive".into(),
                            ));
                        }
                        state.divisions = d;
                    }
                    if let Some(time) = find_child(child, "time") {
                        let beats = child_text_i64(time, "beats").unwrap_or(4);
                        let beat_type = child_text_i64(time, "beat-type").unwrap_or(4);
                        if beat_type > 0 {
                            state.nominal_measure = Ql::new(beats * 4, beat_type);
                        }
                    }
                }
                "note" => parse_note(child, part_index, &mut state, score)?,
                "backup" => {
                    let d = duration_ql(child, state.divisions)?;
                    state.cursor -= d;
                }
                "forward" => {
                    let d = duration_ql(child, state.divisions)?;
                    state.cursor += d;
                }
                // Layout, directions, barlines and similar markup carry no
                // timing information for this pipeline.
                _ => {}
            }
            max_pos = max_pos.max(state.cursor);
        }

        let content_len = max_pos - measure_start;
        let measure_len =
            if content_len > Ql::from(0) { content_len } else { state.nominal_measure };
        state.cursor = measure_start + measure_len;
    }

    if !state.open_ties.is_empty() {
        score
            .warnings
            .push(format!("part {part_index}: {} unterminated tie(s)", state.open_ties.len()));
    }
    Ok(state.cursor)
}

fn parse_note(
    note: Node,
    part_index: usize,
    state: &mut PartState,
    score: &mut ParsedScore,
) -> Result<(), ScoreError> {
    if find_child(note, "grace").is_some() {
        score.warnings.push(format!(
            "part {part_index}: grace note skipped at offset {}",
            state.cursor
        ));
        return Ok(());
    }
    if find_child(note, "unpitched").is_some() {
        return Err(ScoreError::UnsupportedFeature("unpitched".into()));
    }

    let duration = duration_ql(note, state.divisions)?;
    if duration == Ql::from(0) {
        score.warnings.push(format!(
            "part {part_index}: zero-duration note skipped at offset {}",
            state.cursor
        ));
        return Ok(());
    }
    let is_chord = find_child(note, "chord").is_some();
    let onset = if is_chord { state.last_onset } else { state.cursor };

    if !is_chord {
        state.last_onset = state.cursor;
        state.last_duration = duration;
        state.cursor += duration;
    }

    if find_child(note, "rest").is_some() {
        return Ok(());
    }

    let pitch_node = find_child(note, "pitch")
        .ok_or_else(|| ScoreError::MalformedFile("note without pitch or rest".into()))?;
    let pitch = midi_pitch(pitch_node)?;
    let voice = note
        .children()
        .find(|n| n.is_element() && n.tag_name().name() == "voice")
        .and_then(|n| n.text())
        .unwrap_or("1")
        .trim()
        .to_string();

    let mut tie_start = false;
    let mut tie_stop = false;
    for tie in note.children().filter(|n| n.is_element() && n.tag_name().name() == "tie") {
        match tie.attribute("type") {
            Some("start") => tie_start = true,
            Some("stop") => tie_stop = true,
            _ => {}
        }
    }

    let key = (voice, pitch);
    if tie_stop {
        if let Some(&idx) = state.open_ties.get(&key) {
            score.notes[idx].duration += duration;
            if !tie_start {
                state.open_ties.remove(&key);
            }
            return Ok(());
        }
        // A stop without a matching start: fall through and treat the
        // note as a fresh attack.
    }

    score.notes.push(TimedNote::new(onset, duration, pitch, part_index));
    if tie_start {
        state.open_ties.insert(key, score.notes.len() - 1);
    }
    Ok(())
}

fn midi_pitch(pitch: Node) -> Result<u8, ScoreError> {
    let step = find_child(pitch, "step")
        .and_then(|n| n.text())
        .map(str::trim)
        .ok_or_else(|| ScoreError::MalformedFile("pitch without step".into()))?;
    let semitone: i64 = match step {
        "C" => 0,
        "D" => 2,
        "E" => 4,
        "F" => 5,
        "G" => 7,
        "A" => 9,
        "B" => 11,
        other => {
            return Err(ScoreError::MalformedFile(format!("invalid step {other:?}")));
        }
    };
    let alter = child_text_i64(pitch, "alter").unwrap_or(0);
    let octave = child_text_i64(pitch, "octave")
        .ok_or_else(|| ScoreError::MalformedFile("pitch without octave".into()))?;
    let midi = (octave + 1) * 12 + semitone + alter;
    u8::try_from(midi)
        .ok()
        .filter(|&m| m <= 127)
        .ok_or_else(|| ScoreError::MalformedFile(format!("pitch out of range: {midi}")))
}

fn duration_ql(node: Node, divisions: i64) -> Result<Ql, ScoreError> {
    let d = child_text_i64(node, "duration").ok_or_else(|| {
        ScoreError::MalformedFile(format!("{} without duration", node.tag_name().name()))
    })?;
    if d < 0 {
        return Err(ScoreError::MalformedFile("negative duration".into()));
    }
    Ok(Ql::new(d, divisions))
}

fn find_child<'a>(node: Node<'a, 'a>, name: &str) -> Option<Node<'a, 'a>> {
    node.children().find(|n| n.is_element() && n.tag_name().name() == name)
}

fn child_text_i64(node: Node, name: &str) -> Option<i64> {
    find_child(node, name)?.text()?.trim().parse().ok()
}
