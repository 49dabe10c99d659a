//! Local-hidden-variable strategies against the postselected Bell test.
//!
//! A strategy assigns each party a response table indexed by (hidden
//! variable, own setting) only, so locality holds by construction: the data
//! layout cannot express a dependence on the other party's setting. The
//! interesting part is what conditioning on matched time slots does to such
//! a model: the kept subensemble can fake S = 4 while the full statistics
//! respect S <= 2.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::eventsim::{
    channel_for, dark_tags, finalize_stream, quantize, run_pulse_blocks, PulseClock,
    SettingSchedule, SimConfig, TagStream,
};
use crate::optics::{Party, TimeBin};
use crate::quantum::Outcome;

/// Setting pairs in schedule order: (a b, a' b, a b', a' b').
pub const SETTING_PAIRS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// What a party does for one (hidden variable, setting) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// Deterministic: click in this bin with this outcome.
    Emit { bin: TimeBin, outcome: Outcome },
    /// Stochastic row: probabilities over (bin, outcome) cells, indexed
    /// bin.index() * 2 + outcome.index().
    Mixed { probs: [f64; 4] },
}

impl Response {
    pub fn probs(&self) -> [f64; 4] {
        match self {
            Response::Emit { bin, outcome } => {
                let mut p = [0.0; 4];
                p[bin.index() * 2 + outcome.index()] = 1.0;
                p
            }
            Response::Mixed { probs } => *probs,
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        if let Response::Mixed { probs } = self {
            if probs.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
                return Err(Error::Config(format!(
                    "{path}: probabilities must lie in [0, 1]"
                )));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{path}: probabilities sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// One party's full response table: rows[lambda][setting].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyTable {
    pub rows: Vec<[Response; 2]>,
}

/// A shared-randomness local model over a finite hidden-variable set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStrategy {
    /// Weight of each hidden variable; sums to 1.
    pub weights: Vec<f64>,
    pub alice: PartyTable,
    pub bob: PartyTable,
}

impl LocalStrategy {
    pub fn n_lambda(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 {
            return Err(Error::Config("strategy.weights: empty hidden-variable set".into()));
        }
        if self.alice.rows.len() != n || self.bob.rows.len() != n {
            return Err(Error::Config(format!(
                "strategy: weights ({}), alice rows ({}), bob rows ({}) disagree",
                n,
                self.alice.rows.len(),
                self.bob.rows.len()
            )));
        }
        if self.weights.iter().any(|&w| !(0.0..=1.0).contains(&w) || w.is_nan()) {
            return Err(Error::Config(
                "strategy.weights: each weight must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "strategy.weights: sum to {sum}, expected 1"
            )));
        }
        for (li, row) in self.alice.rows.iter().enumerate() {
            for (s, r) in row.iter().enumerate() {
                r.validate(&format!("strategy.alice.rows[{li}][{s}]"))?;
            }
        }
        for (li, row) in self.bob.rows.iter().enumerate() {
            for (s, r) in row.iter().enumerate() {
                r.validate(&format!("strategy.bob.rows[{li}][{s}]"))?;
            }
        }
        Ok(())
    }
}

fn emit(bin: TimeBin, outcome: Outcome) -> Response {
    Response::Emit { bin, outcome }
}

/// The deterministic two-variable attack. Alice always answers +1 and uses
/// her slot purely to encode her setting; Bob's slot acceptance pattern
/// singles out one setting pair per hidden variable and plants the lone
/// minus sign on (setting 2, setting 2).
pub fn attack_strategy() -> LocalStrategy {
    use Outcome::{Minus, Plus};
    use TimeBin::{Long, Short};
    LocalStrategy {
        weights: vec![0.5, 0.5],
        alice: PartyTable {
            rows: vec![
                [emit(Short, Plus), emit(Long, Plus)],
                [emit(Short, Plus), emit(Long, Plus)],
            ],
        },
        bob: PartyTable {
            rows: vec![
                [emit(Short, Plus), emit(Long, Minus)],
                [emit(Long, Plus), emit(Short, Plus)],
            ],
        },
    }
}

/// Exact evaluation of a strategy with and without slot postselection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    /// Kept-subensemble correlation per setting pair, indexed [a][b];
    /// None where the strategy keeps nothing.
    pub postselected_e: [[Option<f64>; 2]; 2],
    /// Fraction of pairs surviving slot matching, indexed [a][b].
    pub keep_rate: [[f64; 2]; 2],
    /// Unconditioned correlation per setting pair.
    pub full_e: [[f64; 2]; 2],
    /// Alice's mean outcome within the kept subensemble, indexed [a][b].
    pub kept_marginal_a: [[Option<f64>; 2]; 2],
    /// Bob's mean outcome within the kept subensemble, indexed [a][b].
    pub kept_marginal_b: [[Option<f64>; 2]; 2],
    pub s_postselected: Option<f64>,
    pub s_full: f64,
}

pub fn chsh_of(e: &[[f64; 2]; 2]) -> f64 {
    e[0][0] + e[1][0] + e[0][1] - e[1][1]
}

/// Enumerate the strategy exactly over the hidden variables and, for
/// stochastic rows, the response cells. Postselection keeps mass where the
/// two bins coincide.
pub fn evaluate(strategy: &LocalStrategy) -> Result<StrategyReport> {
    strategy.validate()?;
    let mut postselected_e = [[None; 2]; 2];
    let mut keep_rate = [[0.0; 2]; 2];
    let mut full_e = [[0.0; 2]; 2];
    let mut kept_marginal_a = [[None; 2]; 2];
    let mut kept_marginal_b = [[None; 2]; 2];

    for a_set in 0..2 {
        for b_set in 0..2 {
            let mut kept_mass = 0.0;
            let mut kept_prod = 0.0;
            let mut kept_a = 0.0;
            let mut kept_b = 0.0;
            let mut full_prod = 0.0;
            for (li, &w) in strategy.weights.iter().enumerate() {
                let pa = strategy.alice.rows[li][a_set].probs();
                let pb = strategy.bob.rows[li][b_set].probs();
                for (ia, &qa) in pa.iter().enumerate() {
                    if qa == 0.0 {
                        continue;
                    }
                    let sign_a = if ia % 2 == 0 { 1.0 } else { -1.0 };
                    for (ib, &qb) in pb.iter().enumerate() {
                        if qb == 0.0 {
                            continue;
                        }
                        let sign_b = if ib % 2 == 0 { 1.0 } else { -1.0 };
                        let mass = w * qa * qb;
                        full_prod += mass * sign_a * sign_b;
                        if ia / 2 == ib / 2 {
                            kept_mass += mass;
                            kept_prod += mass * sign_a * sign_b;
                            kept_a += mass * sign_a;
                            kept_b += mass * sign_b;
                        }
                    }
                }
            }
            keep_rate[a_set][b_set] = kept_mass;
            full_e[a_set][b_set] = full_prod;
            if kept_mass > 0.0 {
                postselected_e[a_set][b_set] = Some(kept_prod / kept_mass);
                kept_marginal_a[a_set][b_set] = Some(kept_a / kept_mass);
                kept_marginal_b[a_set][b_set] = Some(kept_b / kept_mass);
            }
        }
    }

    let s_postselected = match postselected_e {
        [[Some(e00), Some(e01)], [Some(e10), Some(e11)]] => {
            // chsh_of layout: indexed [a][b]
            let grid = [[e00, e01], [e10, e11]];
            Some(chsh_of(&grid))
        }
        _ => None,
    };
    Ok(StrategyReport {
        postselected_e,
        keep_rate,
        full_e,
        kept_marginal_a,
        kept_marginal_b,
        s_postselected,
        s_full: chsh_of(&full_e),
    })
}

/// Feed a strategy through the event machinery as if it were hardware:
/// classical tag streams with Short mapped to the central-equivalent time
/// of each pulse and Long delayed by delta_t. Detection efficiency, jitter,
/// darks, dead time, and quantization all apply, so the standard analysis
/// pipeline treats the output exactly like quantum data. The schedule must
/// hold the four CHSH setting pairs in order.
pub fn simulate_attack(
    strategy: &LocalStrategy,
    config: &SimConfig,
    schedule: &SettingSchedule,
    delta_t_s: f64,
) -> Result<(TagStream, TagStream, PulseClock)> {
    strategy.validate()?;
    config.validate()?;
    if schedule.entries().len() != SETTING_PAIRS.len() {
        return Err(Error::Config(format!(
            "schedule: expected {} entries (one per setting pair), got {}",
            SETTING_PAIRS.len(),
            schedule.entries().len()
        )));
    }
    if !(delta_t_s > 0.0) || delta_t_s >= 0.5 / config.rep_rate_hz {
        return Err(Error::Config(
            "delta_t_s: must be positive and below half the pulse period".into(),
        ));
    }

    let clock = PulseClock::new(config.rep_rate_hz, config.tagger_resolution_s);
    let res = config.tagger_resolution_s;
    let jitter = if config.jitter_sigma_s > 0.0 {
        Some(Normal::new(0.0, config.jitter_sigma_s).expect("valid sigma"))
    } else {
        None
    };
    let cum_weights: Vec<f64> = strategy
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    // Per-(lambda, setting) response CDFs, precomputed once.
    let cdf = |table: &PartyTable| -> Vec<[[f64; 4]; 2]> {
        table
            .rows
            .iter()
            .map(|row| {
                let mut out = [[0.0; 4]; 2];
                for (s, r) in row.iter().enumerate() {
                    let p = r.probs();
                    let mut acc = 0.0;
                    for c in 0..4 {
                        acc += p[c];
                        out[s][c] = acc;
                    }
                    out[s][3] = f64::MAX;
                }
                out
            })
            .collect()
    };
    let cdf_a = cdf(&strategy.alice);
    let cdf_b = cdf(&strategy.bob);

    let pulses = schedule.total_pulses();
    let (alice, bob) = run_pulse_blocks(config.rng_seed, pulses, |k, rng, out_a, out_b| {
        if rng.random::<f64>() >= config.pair_prob_per_pulse {
            return;
        }
        let entry = schedule.setting_at_pulse(k);
        let (a_set, b_set) = SETTING_PAIRS[entry];
        let u: f64 = rng.random();
        let li = cum_weights.partition_point(|&c| c < u).min(cum_weights.len() - 1);
        let t0 = clock.pulse_time_s(k);
        for (cdf_p, set, party, out) in [
            (&cdf_a, a_set, Party::Alice, &mut *out_a),
            (&cdf_b, b_set, Party::Bob, &mut *out_b),
        ] {
            let v: f64 = rng.random();
            let cell = cdf_p[li][set].partition_point(|&c| c < v).min(3);
            let bin = TimeBin::from_index(cell / 2);
            let outcome = Outcome::from_index(cell % 2);
            if rng.random::<f64>() < config.efficiency {
                let jit = match &jitter {
                    Some(n) => n.sample(rng),
                    None => 0.0,
                };
                let t = t0
                    + match bin {
                        TimeBin::Short => 0.0,
                        TimeBin::Long => delta_t_s,
                    }
                    + jit;
                out.push(crate::eventsim::TagRecord {
                    channel: channel_for(party, outcome),
                    ticks: quantize(t, res),
                });
            }
        }
    });

    let span = clock.origin_s + pulses as f64 * clock.period_s();
    let dead_ticks = (config.dead_time_s / res).round() as u64;
    let mut alice = alice;
    let mut bob = bob;
    for ch in [0u8, 1] {
        alice.extend(dark_tags(config, ch, span, res));
    }
    for ch in [2u8, 3] {
        bob.extend(dark_tags(config, ch, span, res));
    }
    Ok((
        finalize_stream(alice, dead_ticks),
        finalize_stream(bob, dead_ticks),
        clock,
    ))
}

/// Analyzer phases behind the four abstract settings, used only by the fit
/// objective to define its quantum targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingsGrid {
    pub alice_phases: [f64; 2],
    pub bob_phases: [f64; 2],
}

impl Default for SettingsGrid {
    fn default() -> Self {
        SettingsGrid {
            alice_phases: [-FRAC_PI_4, FRAC_PI_4],
            bob_phases: [0.0, FRAC_PI_2],
        }
    }
}

/// Both-central fraction of an ideal postselected quantum run; the keep
/// target for the fit objective.
pub const QUANTUM_KEEP_RATE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Largest CHSH value in the kept subensemble.
    MaximizePostselectedS,
    /// Smallest max-deviation from the quantum fringe E = V cos(phi_a +
    /// phi_b) plus max-deviation of keep-rates from the quantum fraction.
    FitQuantumStatistics { visibility: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSpec {
    pub n_lambda: usize,
    pub grid: SettingsGrid,
    pub objective: Objective,
    pub restarts: usize,
    /// Full coordinate-ascent sweeps per restart.
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for OptimizeSpec {
    fn default() -> Self {
        OptimizeSpec {
            n_lambda: 4,
            grid: SettingsGrid::default(),
            objective: Objective::MaximizePostselectedS,
            restarts: 8,
            sweeps: 24,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub strategy: LocalStrategy,
    pub report: StrategyReport,
    pub objective_value: f64,
    /// Which restart won.
    pub restart: usize,
    /// Objective after each sweep of the winning restart; never decreases.
    pub history: Vec<f64>,
}

/// Deviation metric for the fit objective: max |E - V cos(phi_a + phi_b)|
/// over the grid plus max |keep - quantum keep| over the grid. None where
/// the strategy starves a pair.
pub fn fit_deviation(report: &StrategyReport, grid: &SettingsGrid, visibility: f64) -> Option<f64> {
    let mut worst_e = 0.0f64;
    let mut worst_keep = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            let target = visibility * (grid.alice_phases[a] + grid.bob_phases[b]).cos();
            let e = report.postselected_e[a][b]?;
            worst_e = worst_e.max((e - target).abs());
            worst_keep = worst_keep.max((report.keep_rate[a][b] - QUANTUM_KEEP_RATE).abs());
        }
    }
    Some(worst_e + worst_keep)
}

fn objective_value(report: &StrategyReport, spec: &OptimizeSpec) -> f64 {
    match spec.objective {
        Objective::MaximizePostselectedS => report.s_postselected.unwrap_or(f64::NEG_INFINITY),
        Objective::FitQuantumStatistics { visibility } => {
            match fit_deviation(report, &spec.grid, visibility) {
                Some(d) => -d,
                None => f64::NEG_INFINITY,
            }
        }
    }
}

fn one_hot(cell: usize) -> [f64; 4] {
    let mut p = [0.0; 4];
    p[cell] = 1.0;
    p
}

fn row_to_response(p: [f64; 4]) -> Response {
    for c in 0..4 {
        if (p[c] - 1.0).abs() < 1e-12 {
            return Response::Emit {
                bin: TimeBin::from_index(c / 2),
                outcome: Outcome::from_index(c % 2),
            };
        }
    }
    Response::Mixed { probs: p }
}

/// Internal dense representation during optimization.
#[derive(Clone)]
struct DenseStrategy {
    weights: Vec<f64>,
    // [party][lambda][setting] -> prob vector
    rows: [Vec<[[f64; 4]; 2]>; 2],
}

impl DenseStrategy {
    fn random(n_lambda: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut raw: Vec<f64> = (0..n_lambda)
            .map(|_| -(rng.random::<f64>().max(1e-12)).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|w| *w /= sum);
        let mut table = || {
            (0..n_lambda)
                .map(|_| {
                    [
                        one_hot((rng.random::<u32>() % 4) as usize),
                        one_hot((rng.random::<u32>() % 4) as usize),
                    ]
                })
                .collect::<Vec<_>>()
        };
        let a = table();
        let b = table();
        DenseStrategy {
            weights: raw,
            rows: [a, b],
        }
    }

    fn to_strategy(&self) -> LocalStrategy {
        let convert = |t: &Vec<[[f64; 4]; 2]>| PartyTable {
            rows: t
                .iter()
                .map(|row| [row_to_response(row[0]), row_to_response(row[1])])
                .collect(),
        };
        let mut weights = self.weights.clone();
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= sum);
        LocalStrategy {
            weights,
            alice: convert(&self.rows[0]),
            bob: convert(&self.rows[1]),
        }
    }
}

fn ascend(dense: &mut DenseStrategy, spec: &OptimizeSpec) -> (f64, Vec<f64>) {
    let score = |d: &DenseStrategy| -> f64 {
        match evaluate(&d.to_strategy()) {
            Ok(r) => objective_value(&r, spec),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let relax = matches!(spec.objective, Objective::FitQuantumStatistics { .. });
    let mut best = score(dense);
    let mut history = Vec::with_capacity(spec.sweeps);

    for _ in 0..spec.sweeps {
        let mut improved = false;
        for party in 0..2 {
            for li in 0..dense.weights.len() {
                for s in 0..2 {
                    let mut current = dense.rows[party][li][s];
                    let mut candidates: Vec<[f64; 4]> = (0..4).map(one_hot).collect();
                    if relax {
                        for c in 0..4 {
                            let mut half = [0.0; 4];
                            let mut quarter = [0.0; 4];
                            for i in 0..4 {
                                half[i] = 0.5 * current[i] + 0.5 * one_hot(c)[i];
                                quarter[i] = 0.75 * current[i] + 0.25 * one_hot(c)[i];
                            }
                            candidates.push(half);
                            candidates.push(quarter);
                        }
                    }
                    for cand in candidates {
                        if cand == current {
                            continue;
                        }
                        dense.rows[party][li][s] = cand;
                        let v = score(dense);
                        if v > best {
                            best = v;
                            current = cand;
                            improved = true;
                        } else {
                            dense.rows[party][li][s] = current;
                        }
                    }
                }
            }
        }
        // weight transfers between hidden variables
        let n = dense.weights.len();
        for i in 0..n {
            for j in 0..n {
                if i == j || dense.weights[i] < 0.05 {
                    continue;
                }
                let delta = 0.1 * dense.weights[i];
                let saved = dense.weights.clone();
                dense.weights[i] -= delta;
                dense.weights[j] += delta;
                let v = score(dense);
                if v > best {
                    best = v;
                    improved = true;
                } else {
                    dense.weights = saved;
                }
            }
        }
        history.push(best);
        if !improved {
            // stationary: remaining sweeps would repeat the same scan
            while history.len() < spec.sweeps {
                history.push(best);
            }
            break;
        }
    }
    (best, history)
}

/// Coordinate ascent with parallel random restarts on per-restart RNG
/// substreams; the result is deterministic for a given spec regardless of
/// thread count.
pub fn optimize_strategy(spec: &OptimizeSpec) -> Result<OptimizeOutcome> {
    if spec.n_lambda == 0 {
        return Err(Error::Config("optimize.n_lambda: must be at least 1".into()));
    }
    if spec.restarts == 0 || spec.sweeps == 0 {
        return Err(Error::Config(
            "optimize: restarts and sweeps must be at least 1".into(),
        ));
    }

    let runs: Vec<(usize, f64, DenseStrategy, Vec<f64>)> = (0..spec.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(0x4c48_5600 + r as u64);
            let mut dense = DenseStrategy::random(spec.n_lambda, &mut rng);
            let (value, history) = ascend(&mut dense, spec);
            (r, value, dense, history)
        })
        .collect();

    let mut best: Option<(usize, f64, DenseStrategy, Vec<f64>)> = None;
    for run in runs {
        let better = match &best {
            None => true,
            Some((_, bv, _, _)) => run.1 > *bv,
        };
        if better {
            best = Some(run);
        }
    }
    let (restart, objective_value, dense, history) = best.expect("at least one restart");
    if objective_value == f64::NEG_INFINITY {
        return Err(Error::Config(
            "optimize: no restart produced a strategy with all setting pairs kept".into(),
        ));
    }
    let strategy = dense.to_strategy();
    let report = evaluate(&strategy)?;
    Ok(OptimizeOutcome {
        strategy,
        report,
        objective_value,
        restart,
        history,
    })
}

/// Uniformly random strategy, mixing deterministic and stochastic rows.
/// Used by property tests and available to the examples.
pub fn random_strategy(n_lambda: usize, rng: &mut ChaCha8Rng) -> LocalStrategy {
    let mut raw: Vec<f64> = (0..n_lambda)
        .map(|_| -(rng.random::<f64>().max(1e-12)).ln())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|w| *w /= sum);
    let mut table = || -> PartyTable {
        PartyTable {
            rows: (0..n_lambda)
                .map(|_| {
                    let mut cell = || {
                        if rng.random::<f64>() < 0.3 {
                            let mut p = [0.0; 4];
                            for q in p.iter_mut() {
                                *q = rng.random::<f64>().max(1e-9);
                            }
                            let s: f64 = p.iter().sum();
                            p.iter_mut().for_each(|q| *q /= s);
                            Response::Mixed { probs: p }
                        } else {
                            emit(
                                TimeBin::from_index((rng.random::<u32>() % 2) as usize),
                                Outcome::from_index((rng.random::<u32>() % 2) as usize),
                            )
                        }
                    };
                    [cell(), cell()]
                })
                .collect(),
        }
    };
    let alice = table();
    let bob = table();
    LocalStrategy {
        weights: raw,
        alice,
        bob,
    }
}
