//! Graph-based structural analysis of symbolic music.
//!
//! The pipeline: parse a MusicXML or Standard MIDI file into a list of
//! timed notes, slice it into vertical events ([`score::chordify`]),
//! accumulate element weights, build one of five typed weighted graphs
//! ([`graph`]), and measure it (centralities, three entropy families,
//! communities). Sweeping a window over the score turns every metric into
//! a discrete time series ([`series`]) that can be plotted or compared
//! with dynamic time warping. [`export`] serializes graphs and series to
//! DOT, GraphML, JSON, SVG and CSV.
//!
//! Durations are exact rationals in quarter lengths throughout; floats
//! appear only in metric values and rendered output.

pub mod communities;
pub mod export;
pub mod graph;
pub mod metrics;
pub mod score;
pub mod series;
pub mod spectral;

pub use num_rational::Rational64;

/// Quarter-length time value. Exact rational arithmetic keeps slice
/// boundaries and duration sums bit-exact.
pub type Ql = Rational64;

/// Shorthand for constructing a quarter-length value.
pub fn ql(numer: i64, denom: i64) -> Ql {
    Rational64::new(numer, denom)
}
