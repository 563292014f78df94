//! Slicing note lists into vertical events and accumulating element
//! weights.

use std::collections::BTreeMap;

use crate::score::{ElementStats, Event, ScoreError, TimedNote, Timeline};
use crate::Ql;

/// Slice the time axis at every distinct onset and offset and emit one
/// [`Event`] per slice in which at least one note sounds.
///
/// Slices covered only by rests produce no event but still advance the
/// time axis. Consecutive events with identical pitch-class sets are kept
/// separate: a re-attack or release boundary starts a new event.
pub fn chordify(notes: &[TimedNote]) -> Result<Timeline, ScoreError> {
    if notes.is_empty() {
        return Err(ScoreError::EmptyInput);
    }

    let mut boundaries: Vec<Ql> = Vec::with_capacity(notes.len() * 2);
    for n in notes {
        boundaries.push(n.onset);
        boundaries.push(n.end());
    }
    boundaries.sort();
    boundaries.dedup();

    let mut events = Vec::new();
    for pair in boundaries.windows(2) {
        let (start, end) = (pair[0], pair[1]);
        let mut pcs: Vec<u8> = notes
            .iter()
            .filter(|n| n.onset <= start && n.end() >= end)
            .map(|n| n.pitch_class())
            .collect();
        pcs.sort_unstable();
        pcs.dedup();
        if !pcs.is_empty() {
            events.push(Event::new(start, end - start, pcs));
        }
    }

    let total = boundaries.last().copied().unwrap_or_else(|| Ql::from(0));
    Ok(Timeline { events, measure_onsets: BTreeMap::new(), total_duration: total })
}

/// Fold a timeline into per-chord, per-pitch-class and per-rhythm
/// cumulative durations and occurrence counts.
pub fn accumulate_weights(timeline: &Timeline) -> Result<ElementStats, ScoreError> {
    if timeline.events.is_empty() {
        return Err(ScoreError::EmptyInput);
    }

    let mut stats = ElementStats::default();
    for event in &timeline.events {
        let chord = stats
            .chord_stats
            .entry(event.pitch_classes.clone())
            .or_insert((Ql::from(0), 0));
        chord.0 += event.duration;
        chord.1 += 1;

        for &pc in &event.pitch_classes {
            let entry = stats.pc_stats.entry(pc).or_insert((Ql::from(0), 0));
            entry.0 += event.duration;
            entry.1 += 1;
        }

        *stats.rhythm_stats.entry(event.duration).or_insert(0) += 1;
        *stats
            .chord_rhythm_counts
            .entry((event.pitch_classes.clone(), event.duration))
            .or_insert(0) += 1;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ql;

    fn note(onset: Ql, dur: Ql, pitch: u8) -> TimedNote {
        TimedNote::new(onset, dur, pitch, 0)
    }

    #[test]
    fn single_note_yields_single_event() {
        let timeline = chordify(&[note(ql(0, 1), ql(4, 1), 60)]).unwrap();
        assert_eq!(timeline.events.len(), 1);
        let e = &timeline.events[0];
        assert_eq!(e.onset, ql(0, 1));
        assert_eq!(e.duration, ql(4, 1));
        assert_eq!(e.pitch_classes, vec![0]);
    }

    #[test]
    fn overlapping_notes_slice_at_all_boundaries() {
        // 60 sounds over [0,2), 64 over [1,3): boundaries {0,1,2,3}.
        let notes = [note(ql(0, 1), ql(2, 1), 60), note(ql(1, 1), ql(2, 1), 64)];
        let timeline = chordify(&notes).unwrap();
        let got: Vec<(Vec<u8>, Ql)> = timeline
            .events
            .iter()
            .map(|e| (e.pitch_classes.clone(), e.duration))
            .collect();
        assert_eq!(
            got,
            vec![
                (vec![0], ql(1, 1)),
                (vec![0, 4], ql(1, 1)),
                (vec![4], ql(1, 1)),
            ]
        );
    }

    #[test]
    fn rests_produce_no_event() {
        let notes = [note(ql(0, 1), ql(1, 1), 60), note(ql(2, 1), ql(1, 1), 62)];
        let timeline = chordify(&notes).unwrap();
        assert_eq!(timeline.events.len(), 2);
        assert_eq!(timeline.events[0].end(), ql(1, 1));
        assert_eq!(timeline.events[1].onset, ql(2, 1));
    }

    #[test]
    fn octave_duplicates_collapse_to_one_pitch_class() {
        let notes = [note(ql(0, 1), ql(1, 1), 60), note(ql(0, 1), ql(1, 1), 72)];
        let timeline = chordify(&notes).unwrap();
        assert_eq!(timeline.events[0].pitch_classes, vec![0]);
    }

    #[test]
    fn reattack_keeps_separate_events() {
        let notes = [note(ql(0, 1), ql(1, 1), 60), note(ql(1, 1), ql(1, 1), 60)];
        let timeline = chordify(&notes).unwrap();
        assert_eq!(timeline.events.len(), 2);
        assert_eq!(timeline.events[0].pitch_classes, timeline.events[1].pitch_classes);
    }

    #[test]
    fn chordify_rejects_empty_input() {
        assert!(matches!(chordify(&[]), Err(ScoreError::EmptyInput)));
    }

    #[test]
    fn weights_count_repetitions_and_sum_durations() {
        let timeline = Timeline {
            events: vec![
                Event::new(ql(0, 1), ql(1, 1), vec![0, 4]),
                Event::new(ql(1, 1), ql(2, 1), vec![0, 4]),
            ],
            measure_onsets: BTreeMap::new(),
            total_duration: ql(3, 1),
        };
        let stats = accumulate_weights(&timeline).unwrap();
        assert_eq!(stats.chord_stats[&vec![0, 4]], (ql(3, 1), 2));
        assert_eq!(stats.pc_stats[&0], (ql(3, 1), 2));
        assert_eq!(stats.pc_stats[&4], (ql(3, 1), 2));
        assert_eq!(stats.rhythm_stats[&ql(1, 1)], 1);
        assert_eq!(stats.rhythm_stats[&ql(2, 1)], 1);
        assert_eq!(stats.chord_rhythm_counts[&(vec![0, 4], ql(1, 1))], 1);
    }

    #[test]
    fn single_event_stats_are_all_one() {
        let timeline = Timeline {
            events: vec![Event::new(ql(0, 1), ql(3, 2), vec![2, 7])],
            measure_onsets: BTreeMap::new(),
            total_duration: ql(3, 2),
        };
        let stats = accumulate_weights(&timeline).unwrap();
        assert_eq!(stats.event_count(), 1);
        assert_eq!(stats.chord_stats[&vec![2, 7]], (ql(3, 2), 1));
        assert_eq!(stats.pc_stats[&2], (ql(3, 2), 1));
        assert_eq!(stats.rhythm_stats[&ql(3, 2)], 1);
    }
}
