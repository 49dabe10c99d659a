//! Path-amplitude model of the source and the two analysis stations.
//!
//! A pumped pair is born in one of two branches, both photons early (SS) or
//! both late (LL), with equal amplitude. Each photon then either keeps its
//! bin or is delayed by one bin inside its analysis interferometer, so it
//! arrives in one of three slots: early (-1), central (0), late (+1). The
//! joint distribution below enumerates the two-photon amplitudes per final
//! (slot, detector) outcome; visibility scales the SS-LL cross terms only.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::quantum::{C64, Outcome, Scheme};
use crate::tol;

/// Arrival slot at a detector, in units of the bin separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Early,
    Central,
    Late,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Early, Slot::Central, Slot::Late];

    /// Offset from the central slot in units of delta_t: -1, 0, +1.
    pub fn offset(self) -> i32 {
        match self {
            Slot::Early => -1,
            Slot::Central => 0,
            Slot::Late => 1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Slot::Early => 0,
            Slot::Central => 1,
            Slot::Late => 2,
        }
    }

    pub fn from_index(i: usize) -> Slot {
        Slot::ALL[i]
    }
}

/// Pump bin a photon is born in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeBin {
    Short,
    Long,
}

impl TimeBin {
    pub const BOTH: [TimeBin; 2] = [TimeBin::Short, TimeBin::Long];

    pub fn index(self) -> usize {
        match self {
            TimeBin::Short => 0,
            TimeBin::Long => 1,
        }
    }

    pub fn from_index(i: usize) -> TimeBin {
        TimeBin::BOTH[i]
    }
}

/// One party's station of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartyOptics {
    /// Analyzer phase in the long arm, radians.
    pub analyzer_phase: f64,
    /// Switch phase applied to the short bin (active scheme), radians.
    pub switch_phase: f64,
    /// Override for the long-bin switch phase; None means switch_phase - pi.
    #[serde(default)]
    pub long_bin_phase: Option<f64>,
}

impl PartyOptics {
    pub fn new(analyzer_phase: f64) -> Self {
        PartyOptics {
            analyzer_phase,
            switch_phase: PI,
            long_bin_phase: None,
        }
    }

    pub fn long_phase(&self) -> f64 {
        self.long_bin_phase.unwrap_or(self.switch_phase - PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

/// Source plus both stations; everything the slot distribution depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalLayout {
    pub scheme: Scheme,
    /// Pair interference visibility in [0, 1].
    pub visibility: f64,
    /// Bin separation, seconds.
    pub delta_t_s: f64,
    pub alice: PartyOptics,
    pub bob: PartyOptics,
}

impl OpticalLayout {
    pub fn new(scheme: Scheme, visibility: f64) -> Self {
        OpticalLayout {
            scheme,
            visibility,
            delta_t_s: 3e-9,
            alice: PartyOptics::new(0.0),
            bob: PartyOptics::new(0.0),
        }
    }

    pub fn party(&self, p: Party) -> &PartyOptics {
        match p {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    pub fn party_mut(&mut self, p: Party) -> &mut PartyOptics {
        match p {
            Party::Alice => &mut self.alice,
            Party::Bob => &mut self.bob,
        }
    }
}

/// Probability of each (slot_A, a, slot_B, b) outcome; 36 entries summing
/// to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcomeDistribution {
    table: [f64; 36],
}

fn cell(slot_a: Slot, a: Outcome, slot_b: Slot, b: Outcome) -> usize {
    ((slot_a.index() * 2 + a.index()) * 3 + slot_b.index()) * 2 + b.index()
}

impl SlotOutcomeDistribution {
    pub fn prob(&self, slot_a: Slot, a: Outcome, slot_b: Slot, b: Outcome) -> f64 {
        self.table[cell(slot_a, a, slot_b, b)]
    }

    pub fn sum(&self) -> f64 {
        self.table.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Slot, Outcome, Slot, Outcome, f64)> + '_ {
        Slot::ALL.into_iter().flat_map(move |sa| {
            Outcome::BOTH.into_iter().flat_map(move |a| {
                Slot::ALL.into_iter().flat_map(move |sb| {
                    Outcome::BOTH
                        .into_iter()
                        .map(move |b| (sa, a, sb, b, self.prob(sa, a, sb, b)))
                })
            })
        })
    }

    /// Probability that the photons land in a given slot pair, any outcome.
    pub fn slot_pair_prob(&self, slot_a: Slot, slot_b: Slot) -> f64 {
        Outcome::BOTH
            .into_iter()
            .flat_map(|a| Outcome::BOTH.into_iter().map(move |b| (a, b)))
            .map(|(a, b)| self.prob(slot_a, a, slot_b, b))
            .sum()
    }

    /// Per-party arrival histogram (early, central, late), any outcome.
    pub fn party_histogram(&self, party: Party) -> [f64; 3] {
        let mut w = [0.0; 3];
        for (sa, _, sb, _, p) in self.iter() {
            let s = match party {
                Party::Alice => sa,
                Party::Bob => sb,
            };
            w[s.index()] += p;
        }
        w
    }

    /// Outcome distribution conditioned on both photons arriving centrally,
    /// indexed [a][b].
    pub fn central_conditional(&self) -> [[f64; 2]; 2] {
        let norm = self.slot_pair_prob(Slot::Central, Slot::Central);
        let mut out = [[0.0; 2]; 2];
        for a in Outcome::BOTH {
            for b in Outcome::BOTH {
                out[a.index()][b.index()] =
                    self.prob(Slot::Central, a, Slot::Central, b) / norm;
            }
        }
        out
    }

    /// Correlation over every slot pair (the no-postselection statistic).
    pub fn correlation_all_slots(&self) -> f64 {
        self.iter()
            .map(|(_, a, _, b, p)| a.sign() * b.sign() * p)
            .sum()
    }

    /// Correlation conditioned on the central-central slot pair.
    pub fn correlation_central(&self) -> f64 {
        let c = self.central_conditional();
        c[0][0] + c[1][1] - c[0][1] - c[1][0]
    }
}

/// Output-port weights of a balanced interferometer with phase phi_m:
/// (toward the short arm, toward the long arm).
pub fn balanced_mzi_split(phi_m: f64) -> (f64, f64) {
    ((0.5 * phi_m).cos().powi(2), (0.5 * phi_m).sin().powi(2))
}

/// Switch phase seen by a photon in a given bin when the short bin is
/// driven at phi_s; the long bin runs at phi_s - pi.
pub fn switch_phase_profile(bin: TimeBin, phi_s: f64) -> f64 {
    match bin {
        TimeBin::Short => phi_s,
        TimeBin::Long => phi_s - PI,
    }
}

/// Detection amplitude for one photon: born in `bin`, leaving through the
/// station of `optics`, arriving at `slot` on detector `x`. Zero unless the
/// slot is reachable (slot = bin + 0 or bin + 1).
///
/// Phases follow the measurement-operator convention of [`crate::quantum`]:
/// only the central slot interferes, and the product of the two central
/// amplitudes reproduces the chi_a cross term of `povm_pi` exactly.
fn photon_amplitude(
    scheme: Scheme,
    optics: &PartyOptics,
    bin: TimeBin,
    slot: Slot,
    x: Outcome,
) -> C64 {
    let born = match bin {
        TimeBin::Short => 0,
        TimeBin::Long => 1,
    };
    let delayed = match (slot.offset() + 1) - born {
        0 => false,
        1 => true,
        _ => return C64::new(0.0, 0.0), // unreachable slot for this bin
    };
    match scheme {
        Scheme::PassivePostselected | Scheme::PassiveFull => {
            // 50/50 splitter in, 50/50 out: each path carries 1/2; the long
            // arm adds the analyzer phase and the detector sign.
            if delayed {
                0.5 * x.sign() * C64::new(0.0, -optics.analyzer_phase).exp()
            } else {
                C64::new(0.5, 0.0)
            }
        }
        Scheme::ActiveSwitch => {
            let phi_s = optics.switch_phase;
            let phi_l = optics.long_phase();
            match (bin, delayed) {
                // short bin kept short: lateral, no interference partner
                (TimeBin::Short, false) => C64::new((0.5 * phi_s).cos() / SQRT_2, 0.0),
                // short bin delayed into the central slot
                (TimeBin::Short, true) => {
                    -C64::i() * C64::new(0.0, 0.5 * phi_s).exp() * (0.5 * phi_s).sin()
                        / SQRT_2
                }
                // long bin kept short, also central
                (TimeBin::Long, false) => {
                    x.sign()
                        * C64::new(0.0, 0.5 * phi_l - optics.analyzer_phase).exp()
                        * (0.5 * phi_l).cos()
                        / SQRT_2
                }
                // long bin delayed: lateral
                (TimeBin::Long, true) => C64::new((0.5 * phi_l).sin() / SQRT_2, 0.0),
            }
        }
    }
}

/// Enumerate the two-photon path amplitudes and return the joint
/// (slot, outcome) distribution for the layout.
pub fn joint_distribution(layout: &OpticalLayout) -> SlotOutcomeDistribution {
    let v = layout.visibility;
    let branch_amp = C64::new(1.0 / SQRT_2, 0.0);
    let mut table = [0.0; 36];
    for sa in Slot::ALL {
        for a in Outcome::BOTH {
            for sb in Slot::ALL {
                for b in Outcome::BOTH {
                    // amplitude of this outcome within each pump branch
                    let mut amp = [C64::new(0.0, 0.0); 2];
                    for (k, bin) in [TimeBin::Short, TimeBin::Long].into_iter().enumerate() {
                        let alice = photon_amplitude(layout.scheme, &layout.alice, bin, sa, a);
                        let bob = photon_amplitude(layout.scheme, &layout.bob, bin, sb, b);
                        amp[k] = branch_amp * alice * bob;
                    }
                    let p = amp[0].norm_sqr()
                        + amp[1].norm_sqr()
                        + 2.0 * v * (amp[0] * amp[1].conj()).re;
                    table[cell(sa, a, sb, b)] = p;
                }
            }
        }
    }
    let dist = SlotOutcomeDistribution { table };
    debug_assert!((dist.sum() - 1.0).abs() < tol::DISTRIBUTION);
    dist
}

/// Per-party arrival histogram (early, central, late) for the layout.
pub fn detector_histogram(layout: &OpticalLayout, party: Party) -> [f64; 3] {
    joint_distribution(layout).party_histogram(party)
}
