//! Simulator and analysis toolkit for time-bin entangled Bell tests.
//!
//! A pulsed source emits photon pairs in a superposition of two time bins
//! 3 ns apart. Each party runs the arrival through an imbalanced
//! interferometer and a detector pair, producing three possible arrival
//! slots per pulse. Three measurement schemes are modeled:
//!
//! * postselected: keep only coincidences where both photons land in the
//!   central slot (classic, but opens the postselection loophole),
//! * no postselection: keep everything and accept that the certified
//!   fringe amplitude drops by 4,
//! * switched: a fast phase switch empties the side slots so that every
//!   detected pair is usable.
//!
//! The crate covers the chain end to end: two-level operator algebra
//! ([`quantum`]), slot amplitudes for the optical table ([`optics`]), a time
//! tagger Monte Carlo ([`eventsim`]), coincidence counting and CHSH
//! estimation ([`analysis`]), the leakage-ratio lock that keeps the switch
//! at its operating point ([`lock`]), explicit local-hidden-variable
//! strategies that fake a violation through the postselection ([`lhv`]),
//! and experiment orchestration with file outputs ([`runner`], [`recipe`]).
//!
//! Runnable walkthroughs, one per capability (`cargo run --example NAME`):
//!
//! * `operator_algebra`: the three measurement families and their algebra
//! * `three_peak_histogram`: the 1:2:1 arrival-time structure
//! * `switch_histograms`: slot weights vs switch phase, ideal-point zero,
//!   and the histogram's reflection ambiguity
//! * `bell_scheme_comparison`: S for all three schemes side by side
//! * `visibility_scan`: fringe scans and the factor-4 visibility collapse
//! * `phase_lock`: closed-loop acquisition, hold, and loss
//! * `postselection_attack`: a local model scoring S = 4 through the
//!   standard pipeline
//! * `strategy_search`: coordinate-ascent search over local strategies
//!
//! The same functionality is scriptable through the `franson` binary
//! (`bell`, `scan`, `lock`, `lhv`, `histogram` subcommands).

pub mod analysis;
pub mod dump;
pub mod error;
pub mod eventsim;
pub mod lhv;
pub mod lock;
pub mod optics;
pub mod quantum;
pub mod recipe;
pub mod runner;

pub use error::{Error, Result};

/// Numerical tolerances used by the library and its test suites.
pub mod tol {
    /// Operator-algebra identities (hermiticity, completeness, closed forms).
    pub const OPERATOR: f64 = 1e-12;
    /// Probability distributions derived by amplitude enumeration.
    pub const DISTRIBUTION: f64 = 1e-9;
}
