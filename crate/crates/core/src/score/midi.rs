//! Standard MIDI File ingestion (formats 0 and 1).
//!
//! Time is measured in ticks and converted to quarter lengths via the
//! ticks-per-quarter header; tempo events are ignored. A note-on with
//! velocity 0 counts as a note-off. Measure boundaries are derived from
//! time-signature meta events, defaulting to 4/4 when absent.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use midly::{MetaMessage, MidiMessage, Smf, Timing, TrackEventKind};

use crate::score::{ParsedScore, ScoreError, TimedNote};
use crate::Ql;

pub fn parse_midi(bytes: &[u8]) -> Result<ParsedScore, ScoreError> {
    let smf = Smf::parse(bytes)
        .map_err(|e| ScoreError::MalformedFile(format!("SMF parse error: {e}")))?;

    if matches!(smf.header.format, midly::Format::Sequential) {
        return Err(ScoreError::UnsupportedFeature("SMF format 2 (sequential)".into()));
    }
    let tpq: i64 = match smf.header.timing {
        Timing::Metrical(t) => i64::from(t.as_int()),
        Timing::Timecode(..) => {
            return Err(ScoreError::UnsupportedFeature("SMPTE timecode division".into()));
        }
    };
    if tpq <= 0 {
        return Err(ScoreError::MalformedFile("ticks-per-quarter must be positive".into()));
    }

    let mut score = ParsedScore::default();
    // (absolute tick, numerator, denominator) of every time signature.
    let mut time_sigs: Vec<(i64, i64, i64)> = Vec::new();
    let mut max_end_ticks: i64 = 0;

    for (track_index, track) in smf.tracks.iter().enumerate() {
        let mut abs: i64 = 0;
        // (channel, key) -> onsets of currently sounding notes, oldest first.
        let mut open: BTreeMap<(u8, u8), VecDeque<i64>> = BTreeMap::new();

        for event in track {
            abs += i64::from(event.delta.as_int());
            match event.kind {
                TrackEventKind::Midi { channel, message } => match message {
                    MidiMessage::NoteOn { key, vel } if vel.as_int() > 0 => {
                        open.entry((channel.as_int(), key.as_int()))
                            .or_default()
                            .push_back(abs);
                    }
                    MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => {
                        let slot = open.entry((channel.as_int(), key.as_int())).or_default();
                        if let Some(onset) = slot.pop_front() {
                            if abs > onset {
                                score.notes.push(TimedNote::new(
                                    Ql::new(onset, tpq),
                                    Ql::new(abs - onset, tpq),
                                    key.as_int(),
                                    track_index,
                                ));
                                max_end_ticks = max_end_ticks.max(abs);
                            } else {
                                score.warnings.push(format!(
                                    "track {track_index}: zero-length note {} at tick {abs} dropped",
                                    key.as_int()
                                ));
                            }
                        }
                        // An unmatched note-off is silently ignored.
                    }
                    _ => {}
                },
                TrackEventKind::Meta(MetaMessage::TimeSignature(num, den_pow2, _, _)) => {
                    time_sigs.push((abs, i64::from(num), 1i64 << den_pow2));
                }
                _ => {}
            }
        }

        // Dangling note-ons: truncate at the end of the track.
        for ((_, key), onsets) in open {
            for onset in onsets {
                if abs > onset {
                    score.notes.push(TimedNote::new(
                        Ql::new(onset, tpq),
                        Ql::new(abs - onset, tpq),
                        key,
                        track_index,
                    ));
                    max_end_ticks = max_end_ticks.max(abs);
                    score.warnings.push(format!(
                        "track {track_index}: unmatched note-on for key {key} truncated at track end"
                    ));
                } else {
                    score.warnings.push(format!(
                        "track {track_index}: unmatched note-on for key {key} at track end dropped"
                    ));
                }
            }
        }
    }

    if score.notes.is_empty() {
        return Err(ScoreError::MalformedFile("no notes found".into()));
    }
    score.notes.sort_by(|a, b| {
        (a.onset, a.part_index, a.pitch).cmp(&(b.onset, b.part_index, b.pitch))
    });

    time_sigs.sort();
    time_sigs.dedup();
    let sigs_ql: Vec<(Ql, Ql)> = time_sigs
        .iter()
        .map(|&(tick, num, den)| (Ql::new(tick, tpq), Ql::new(num * 4, den)))
        .collect();
    let max_end = Ql::new(max_end_ticks, tpq);
    build_measures(&mut score, &sigs_ql, max_end);
    Ok(score)
}

/// Lay out the measure grid from the time-signature changes (given as
/// (onset, measure length) in quarter lengths), extending the total
/// duration to the next barline so trailing notes sit in a complete final
/// measure.
fn build_measures(score: &mut ParsedScore, sigs: &[(Ql, Ql)], max_end: Ql) {
    let mut measure_len = Ql::from(4); // 4/4 default
    let mut sig_iter = sigs.iter().peekable();
    let mut onset = Ql::from(0);
    let mut number: u32 = 1;

    while onset < max_end || number == 1 {
        // A change applies from the first measure starting at or after it.
        while let Some(&&(at, len)) = sig_iter.peek() {
            if at <= onset {
                if len > Ql::from(0) {
                    measure_len = len;
                }
                sig_iter.next();
            } else {
                break;
            }
        }
        score.measure_onsets.insert(number, onset);
        onset += measure_len;
        number += 1;
        if number > 100_000 {
            break; // guard against degenerate grids
        }
    }
    score.total_duration = onset.max(max_end);
}
