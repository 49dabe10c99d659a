//! Turning tag streams back into physics: folded histograms, coincidence
//! matching, correlation and CHSH estimation, fringe fitting.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::eventsim::{outcome_of_channel, PulseClock, SettingSchedule, TagStream};
use crate::optics::Slot;
use crate::quantum::Outcome;

/// How detections are paired into coincidences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoincidenceMode {
    /// Keep only pairs in which both tags fall within half a window of the
    /// central slot: the postselected analysis.
    CentralOnly,
    /// Pair anything within the window, whatever the slots.
    AllSlots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidencePolicy {
    /// Full pairing window: tags match when |t_A - t_B| <= window.
    pub window_s: f64,
    pub mode: CoincidenceMode,
}

impl CoincidencePolicy {
    pub fn central_only(window_s: f64) -> Self {
        CoincidencePolicy {
            window_s,
            mode: CoincidenceMode::CentralOnly,
        }
    }

    pub fn all_slots(window_s: f64) -> Self {
        CoincidencePolicy {
            window_s,
            mode: CoincidenceMode::AllSlots,
        }
    }

    /// Check the window suits the mode for a given bin separation:
    /// central-only needs a window below delta_t so lateral slots cannot
    /// leak in; all-slots needs one that spans the full three-peak profile.
    pub fn validate(&self, delta_t_s: f64, jitter_allowance_s: f64) -> Result<()> {
        if !(self.window_s > 0.0) {
            return Err(Error::Config("policy.window_s: must be positive".into()));
        }
        match self.mode {
            CoincidenceMode::CentralOnly => {
                if self.window_s >= delta_t_s {
                    return Err(Error::Config(format!(
                        "policy.window_s: central-only window {} must stay below the bin separation {}",
                        self.window_s, delta_t_s
                    )));
                }
            }
            CoincidenceMode::AllSlots => {
                if self.window_s < 2.0 * delta_t_s + jitter_allowance_s {
                    return Err(Error::Config(format!(
                        "policy.window_s: all-slots window {} must cover the slot spread {}",
                        self.window_s,
                        2.0 * delta_t_s + jitter_allowance_s
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One matched detection pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coincidence {
    pub a: Outcome,
    pub b: Outcome,
    /// Index into the setting schedule active at this pulse.
    pub setting: usize,
    pub slot_a: Slot,
    pub slot_b: Slot,
    pub t_a_s: f64,
    pub t_b_s: f64,
}

fn check_sorted(stream: &TagStream, who: &str) -> Result<()> {
    let ok = stream
        .windows(2)
        .all(|w| (w[0].ticks, w[0].channel) <= (w[1].ticks, w[1].channel));
    if ok {
        Ok(())
    } else {
        Err(Error::BadInput(format!("{who} stream is not sorted")))
    }
}

fn classify_slot(phase_s: f64, delta_t_s: f64) -> Slot {
    let k = (phase_s / delta_t_s).round().clamp(-1.0, 1.0) as i32;
    match k {
        -1 => Slot::Early,
        1 => Slot::Late,
        _ => Slot::Central,
    }
}

/// Greedy earliest-first one-to-one pairing of two sorted streams. Symmetric
/// in its inputs up to swapping the (a, b) labels, and deterministic.
pub fn find_coincidences(
    alice: &TagStream,
    bob: &TagStream,
    policy: &CoincidencePolicy,
    clock: &PulseClock,
    delta_t_s: f64,
    schedule: Option<&SettingSchedule>,
) -> Result<Vec<Coincidence>> {
    if !(policy.window_s > 0.0) {
        return Err(Error::Config("policy.window_s: must be positive".into()));
    }
    check_sorted(alice, "alice")?;
    check_sorted(bob, "bob")?;

    let keep = |t_s: f64| match policy.mode {
        CoincidenceMode::CentralOnly => clock.phase_of(t_s).abs() <= 0.5 * policy.window_s,
        CoincidenceMode::AllSlots => true,
    };
    // Postselect detections first, then pair what survives.
    let times = |s: &TagStream| -> Vec<(f64, u8)> {
        s.iter()
            .map(|t| (clock.ticks_to_seconds(t.ticks), t.channel))
            .filter(|&(t, _)| keep(t))
            .collect()
    };
    let ta = times(alice);
    let tb = times(bob);

    let mut out = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < ta.len() && j < tb.len() {
        let (t1, ch_a) = ta[i];
        let (t2, ch_b) = tb[j];
        if (t1 - t2).abs() <= policy.window_s {
            let pulse = clock.nearest_pulse(t1.min(t2));
            let setting = schedule.map_or(0, |s| s.setting_at_pulse(pulse));
            out.push(Coincidence {
                a: outcome_of_channel(ch_a),
                b: outcome_of_channel(ch_b),
                setting,
                slot_a: classify_slot(clock.phase_of(t1), delta_t_s),
                slot_b: classify_slot(clock.phase_of(t2), delta_t_s),
                t_a_s: t1,
                t_b_s: t2,
            });
            i += 1;
            j += 1;
        } else if t1 < t2 {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(out)
}

/// Detection-time histogram folded onto the pulse clock, phase range
/// [-T/2, T/2). An empty stream folds to an all-zero histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width_s: f64,
    /// Phase of the left edge of bin 0.
    pub start_s: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_center_s(&self, i: usize) -> f64 {
        self.start_s + (i as f64 + 0.5) * self.bin_width_s
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts within half a bin separation of a slot position.
    pub fn slot_area(&self, slot_phase_s: f64, half_width_s: f64) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(i, _)| (self.bin_center_s(*i) - slot_phase_s).abs() <= half_width_s)
            .map(|(_, &c)| c)
            .sum()
    }
}

pub fn histogram(stream: &TagStream, clock: &PulseClock, bin_width_s: f64) -> Result<Histogram> {
    let period = clock.period_s();
    if !(bin_width_s > 0.0) || bin_width_s >= period {
        return Err(Error::Config(
            "bin_width_s: must be positive and below the pulse period".into(),
        ));
    }
    if bin_width_s < clock.tagger_resolution_s {
        return Err(Error::Config(
            "bin_width_s: below the tagger resolution".into(),
        ));
    }
    let n = (period / bin_width_s).ceil() as usize;
    let start = -0.5 * period;
    let mut counts = vec![0u64; n];
    for t in stream {
        let phase = clock.phase_of(clock.ticks_to_seconds(t.ticks));
        let idx = ((phase - start) / bin_width_s).floor() as isize;
        let idx = idx.clamp(0, n as isize - 1) as usize;
        counts[idx] += 1;
    }
    Ok(Histogram {
        bin_width_s,
        start_s: start,
        counts,
    })
}

/// Recover a pulse clock from the tags themselves by folding at the known
/// repetition rate and centering on the tallest peak. Fallback for imported
/// dumps without a recorded clock.
pub fn clock_from_peak(
    stream: &TagStream,
    rep_rate_hz: f64,
    tagger_resolution_s: f64,
    bin_width_s: f64,
) -> Result<PulseClock> {
    if stream.is_empty() {
        return Err(Error::BadInput("cannot locate a peak in an empty stream".into()));
    }
    let period = 1.0 / rep_rate_hz;
    let n = (period / bin_width_s).ceil() as usize;
    let mut counts = vec![0u64; n];
    for t in stream {
        let phase = (t.ticks as f64 * tagger_resolution_s).rem_euclid(period);
        let idx = ((phase / bin_width_s).floor() as usize).min(n - 1);
        counts[idx] += 1;
    }
    let peak = counts
        .iter()
        .enumerate()
        .max_by_key(|(_, &c)| c)
        .map(|(i, _)| i)
        .unwrap();
    let origin = (peak as f64 + 0.5) * bin_width_s;
    Ok(PulseClock {
        rep_rate_hz,
        tagger_resolution_s,
        origin_s: origin,
    })
}

/// Correlation estimate from coincidence counts with multinomial errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub e: f64,
    pub sigma: f64,
    /// Counts indexed (a, b): [++, +-, -+, --].
    pub counts: [u64; 4],
}

/// E = (N++ + N-- - N+- - N-+) / N with sigma from the multinomial model,
/// floored at 1/N so degenerate outcomes keep a finite weight.
pub fn estimate_correlation(coincidences: &[Coincidence]) -> Result<CorrelationEstimate> {
    let mut counts = [0u64; 4];
    for c in coincidences {
        counts[c.a.index() * 2 + c.b.index()] += 1;
    }
    correlation_from_counts(counts)
}

pub fn correlation_from_counts(counts: [u64; 4]) -> Result<CorrelationEstimate> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::BadInput(
            "no coincidences recorded for this setting".into(),
        ));
    }
    let nf = n as f64;
    let e = (counts[0] as f64 + counts[3] as f64 - counts[1] as f64 - counts[2] as f64) / nf;
    let sigma = ((1.0 - e * e) / nf).sqrt().max(1.0 / nf);
    Ok(CorrelationEstimate { e, sigma, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueWithSigma {
    pub value: f64,
    pub sigma: f64,
}

/// Result of a four-setting CHSH run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellRunResult {
    /// Analyzer phases (phi_a, phi_b) of the four settings, in schedule
    /// order (a b, a' b, a b', a' b').
    pub settings: [(f64, f64); 4],
    pub correlations: [CorrelationEstimate; 4],
    pub s_value: f64,
    pub s_sigma: f64,
    /// Standard deviations of violation, (S - 2) / sigma_S.
    pub significance_sd: f64,
    /// Visibility implied by S at the optimal angles, S / (2 sqrt 2).
    pub visibility: ValueWithSigma,
}

/// Combine four correlation estimates, in schedule order, into S with the
/// minus sign on the (a', b') term.
pub fn estimate_chsh(
    settings: [(f64, f64); 4],
    correlations: [CorrelationEstimate; 4],
) -> BellRunResult {
    let [e1, e2, e3, e4] = correlations.map(|c| c.e);
    let s = e1 + e2 + e3 - e4;
    let s_sigma = correlations
        .iter()
        .map(|c| c.sigma * c.sigma)
        .sum::<f64>()
        .sqrt();
    BellRunResult {
        settings,
        correlations,
        s_value: s,
        s_sigma,
        significance_sd: (s - 2.0) / s_sigma,
        visibility: ValueWithSigma {
            value: s / (2.0 * SQRT_2),
            sigma: s_sigma / (2.0 * SQRT_2),
        },
    }
}

/// Least-squares fit of r(phi) = C [1 + V cos(phi + phi0)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityFit {
    pub visibility: f64,
    pub sigma: f64,
    /// Mean level C.
    pub mean: f64,
    /// Phase offset phi0.
    pub phase: f64,
}

/// Fit a fringe through (phi, rate) scan points. Wants at least four points
/// spanning half a period; a shorter span is attempted anyway (the caller
/// may warn) and fails here only when the design matrix degenerates.
pub fn fit_visibility(points: &[(f64, f64)]) -> Result<VisibilityFit> {
    if points.len() < 4 {
        return Err(Error::BadInput(format!(
            "fringe fit needs at least 4 points, got {}",
            points.len()
        )));
    }

    // linear model r = a0 + a1 cos(phi) + a2 sin(phi)
    let mut xtx = Matrix3::<f64>::zeros();
    let mut xty = Vector3::<f64>::zeros();
    for &(phi, r) in points {
        let row = Vector3::new(1.0, phi.cos(), phi.sin());
        xtx += row * row.transpose();
        xty += row * r;
    }
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::BadInput("degenerate design matrix in fringe fit".into()))?;
    let coeff = inv * xty;
    let (a0, a1, a2) = (coeff[0], coeff[1], coeff[2]);
    if !(a0.is_finite() && a1.is_finite() && a2.is_finite()) {
        return Err(Error::BadInput("degenerate design matrix in fringe fit".into()));
    }
    if !(a0 > 0.0) {
        return Err(Error::BadInput(
            "fringe fit found a non-positive mean rate".into(),
        ));
    }

    let rss: f64 = points
        .iter()
        .map(|&(phi, r)| {
            let fit = a0 + a1 * phi.cos() + a2 * phi.sin();
            (r - fit) * (r - fit)
        })
        .sum();
    let dof = points.len() as f64 - 3.0;
    let var = if dof > 0.0 { rss / dof } else { 0.0 };
    let cov = inv * var;

    let amp = a1.hypot(a2);
    let visibility = amp / a0;
    let sigma = if amp < 1e-12 * a0.max(1.0) {
        ((cov[(1, 1)] + cov[(2, 2)]).max(0.0)).sqrt() / a0
    } else {
        let g = Vector3::new(-amp / (a0 * a0), a1 / (amp * a0), a2 / (amp * a0));
        (g.dot(&(cov * g))).max(0.0).sqrt()
    };
    Ok(VisibilityFit {
        visibility,
        sigma,
        mean: a0,
        phase: (-a2).atan2(a1),
    })
}
