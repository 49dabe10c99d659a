//! Orchestration: each function here is one complete experiment, from
//! recipe to files on disk, returning the numbers plus a printable summary.
//! Result files never contain wall-clock data; timing lives in a separate
//! metadata file so reruns with the same seed are byte-identical.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::analysis::{
    correlation_from_counts, estimate_chsh, find_coincidences, fit_visibility, histogram,
    BellRunResult, CoincidencePolicy, CorrelationEstimate, Histogram, VisibilityFit,
};
use crate::dump::{write_dump, write_tags_csv, TagDumpHeader, TagDumpPaths, TAG_DUMP_VERSION};
use crate::error::{Error, Result};
use crate::eventsim::{
    run_scheduled, run_simulation, schedule_settings, SettingEntry, SettingSchedule, SimConfig,
};
use crate::lhv::{
    attack_strategy, evaluate, optimize_strategy, simulate_attack, OptimizeOutcome, OptimizeSpec,
    StrategyReport,
};
use crate::lock::{
    closed_loop_sim, settled_rms_error, DriftModel, LockConfig, LockSample,
};
use crate::optics::Party;
use crate::quantum::Outcome;
use crate::recipe::{ChshAngles, ExperimentRecipe};

/// Residual above which a lock run is declared lost.
pub const LOCK_LOSS_THRESHOLD_RAD: f64 = 0.1;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_histogram_csv(path: &Path, h: &Histogram) -> Result<()> {
    let mut out = String::from("bin_center_s,counts\n");
    for (i, &c) in h.counts.iter().enumerate() {
        writeln!(out, "{:.12e},{}", h.bin_center_s(i), c).expect("string write");
    }
    write_text(path, &out)
}

/// Timing sidecar, deliberately the only place wall-clock data appears.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub started_unix_s: u64,
    pub elapsed_s: f64,
}

fn write_meta(dir: &Path, started: SystemTime, t0: Instant) -> Result<()> {
    let meta = RunMeta {
        started_unix_s: started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        elapsed_s: t0.elapsed().as_secs_f64(),
    };
    write_json(&dir.join("run_meta.json"), &meta)
}

fn histogram_bin_s(config: &SimConfig) -> f64 {
    (2.0 * config.tagger_resolution_s).max(0.1e-9)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4}"),
        None => "n/a (no kept pairs)".into(),
    }
}

fn resolve_out_dir(explicit: &Option<PathBuf>, default_name: String) -> PathBuf {
    match explicit {
        Some(d) => d.clone(),
        None => PathBuf::from(default_name),
    }
}

fn bell_schedule(angles: &ChshAngles, duration_s: f64, rep_rate_hz: f64) -> Result<SettingSchedule> {
    let entries = angles
        .setting_pairs()
        .iter()
        .map(|&(phi_a, phi_b)| SettingEntry {
            phi_a,
            phi_b,
            duration_s,
        })
        .collect();
    schedule_settings(entries, rep_rate_hz)
}

fn correlations_by_setting(
    coincidences: &[crate::analysis::Coincidence],
    n_settings: usize,
) -> Result<Vec<CorrelationEstimate>> {
    let mut counts = vec![[0u64; 4]; n_settings];
    for c in coincidences {
        counts[c.setting][c.a.index() * 2 + c.b.index()] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            correlation_from_counts(c)
                .map_err(|_| Error::BadInput(format!("no coincidences at setting {i}")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BellArtifacts {
    pub result: BellRunResult,
    pub out_dir: PathBuf,
    pub total_coincidences: u64,
    pub summary: String,
}

fn render_bell_summary(recipe: &ExperimentRecipe, result: &BellRunResult, total: u64) -> String {
    let mut s = String::new();
    writeln!(s, "Bell run, scheme {}", recipe.scheme).unwrap();
    writeln!(
        s,
        "  layout: visibility {:.3}, bin separation {:.2} ns",
        recipe.layout.visibility,
        recipe.layout.delta_t_s * 1e9
    )
    .unwrap();
    writeln!(
        s,
        "  coincidence policy: {:?}, window {:.2} ns",
        recipe.policy.mode,
        recipe.policy.window_s * 1e9
    )
    .unwrap();
    writeln!(s, "  coincidences: {total}").unwrap();
    for (i, (angles, est)) in result
        .settings
        .iter()
        .zip(result.correlations.iter())
        .enumerate()
    {
        writeln!(
            s,
            "  setting {i}: phi_a {:+.4}, phi_b {:+.4}  E = {:+.4} +- {:.4}  (N = {})",
            angles.0,
            angles.1,
            est.e,
            est.sigma,
            est.counts.iter().sum::<u64>()
        )
        .unwrap();
    }
    writeln!(
        s,
        "  S = {:.4} +- {:.4}  ({:+.1} sd relative to the classical bound 2)",
        result.s_value, result.s_sigma, result.significance_sd
    )
    .unwrap();
    writeln!(
        s,
        "  implied visibility S / (2 sqrt 2) = {:.4} +- {:.4}",
        result.visibility.value, result.visibility.sigma
    )
    .unwrap();
    s
}

/// Four-setting CHSH acquisition and analysis with file outputs: recipe
/// snapshot, result JSON, summary text, per-party histograms, optional raw
/// tag dumps, and a timing sidecar.
pub fn run_bell(recipe: &ExperimentRecipe) -> Result<BellArtifacts> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    recipe.validate()?;

    let schedule = bell_schedule(
        &recipe.angles,
        recipe.duration_per_setting_s,
        recipe.sim.rep_rate_hz,
    )?;
    let (alice, bob, clock) = run_scheduled(&recipe.sim, &recipe.layout, &schedule)?;
    let coincidences = find_coincidences(
        &alice,
        &bob,
        &recipe.policy,
        &clock,
        recipe.layout.delta_t_s,
        Some(&schedule),
    )?;
    let estimates = correlations_by_setting(&coincidences, 4)?;
    let estimates: [CorrelationEstimate; 4] = estimates.try_into().expect("four settings");
    let result = estimate_chsh(recipe.angles.setting_pairs(), estimates);
    let total = coincidences.len() as u64;

    let out_dir = resolve_out_dir(
        &recipe.out_dir,
        format!("bell_{}_seed{}", recipe.scheme, recipe.sim.rng_seed),
    );
    ensure_dir(&out_dir)?;
    write_text(&out_dir.join("recipe.json"), &(recipe.to_json()? + "\n"))?;
    write_json(&out_dir.join("result.json"), &result)?;
    if recipe.write_histograms {
        let bin = histogram_bin_s(&recipe.sim);
        write_histogram_csv(
            &out_dir.join("alice_histogram.csv"),
            &histogram(&alice, &clock, bin)?,
        )?;
        write_histogram_csv(
            &out_dir.join("bob_histogram.csv"),
            &histogram(&bob, &clock, bin)?,
        )?;
    }
    if recipe.dump_tags {
        let header = TagDumpHeader {
            format_version: TAG_DUMP_VERSION,
            config: recipe.sim.clone(),
            layout: recipe.layout.clone(),
            clock,
            schedule: schedule.clone(),
        };
        write_dump(&TagDumpPaths::new(&out_dir, "tags"), &alice, &bob, &header)?;
    }
    let summary = render_bell_summary(recipe, &result, total);
    write_text(&out_dir.join("summary.txt"), &summary)?;
    write_meta(&out_dir, started, t0)?;
    Ok(BellArtifacts {
        result,
        out_dir,
        total_coincidences: total,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanArtifacts {
    /// (analyzer phase, plus-plus coincidence rate in Hz).
    pub points: Vec<(f64, f64)>,
    pub fit: Option<VisibilityFit>,
    pub fit_error: Option<String>,
    pub warnings: Vec<String>,
    pub out_dir: PathBuf,
    pub summary: String,
}

/// Coincidence-rate fringe scan: steps one party's analyzer phase across a
/// range, records the (+, +) detector-pair coincidence rate, and fits the
/// sinusoid. A range shorter than half a period warns but still fits.
pub fn run_scan(
    recipe: &ExperimentRecipe,
    party: Party,
    phi_start_rad: f64,
    phi_stop_rad: f64,
    steps: usize,
) -> Result<ScanArtifacts> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    recipe.validate()?;
    if steps < 4 {
        return Err(Error::Config(format!(
            "scan.steps: need at least 4, got {steps}"
        )));
    }
    if !phi_start_rad.is_finite() || !phi_stop_rad.is_finite() || phi_start_rad == phi_stop_rad {
        return Err(Error::Config(
            "scan range: bounds must be finite and distinct".into(),
        ));
    }

    let mut warnings = Vec::new();
    if (phi_stop_rad - phi_start_rad).abs() < PI {
        warnings.push(format!(
            "scan range {:.3} rad is shorter than half a period; the fit may be poorly conditioned",
            (phi_stop_rad - phi_start_rad).abs()
        ));
    }

    let mut points = Vec::with_capacity(steps);
    for i in 0..steps {
        let phi = phi_start_rad
            + (phi_stop_rad - phi_start_rad) * i as f64 / (steps - 1) as f64;
        let mut layout = recipe.layout.clone();
        layout.party_mut(party).analyzer_phase = phi;
        let mut sim = recipe.sim.clone();
        sim.duration_s = recipe.duration_per_setting_s;
        sim.rng_seed = recipe.sim.rng_seed.wrapping_add(i as u64);
        let (alice, bob, clock) = run_simulation(&sim, &layout)?;
        let cs = find_coincidences(
            &alice,
            &bob,
            &recipe.policy,
            &clock,
            layout.delta_t_s,
            None,
        )?;
        let n_pp = cs
            .iter()
            .filter(|c| c.a == Outcome::Plus && c.b == Outcome::Plus)
            .count();
        points.push((phi, n_pp as f64 / recipe.duration_per_setting_s));
    }

    let (fit, fit_error) = match fit_visibility(&points) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let out_dir = resolve_out_dir(
        &recipe.out_dir,
        format!("scan_{}_seed{}", recipe.scheme, recipe.sim.rng_seed),
    );
    ensure_dir(&out_dir)?;
    let mut csv = String::from("phi_rad,rate_hz\n");
    for &(phi, rate) in &points {
        writeln!(csv, "{phi:.9},{rate:.6}").expect("string write");
    }
    write_text(&out_dir.join("scan.csv"), &csv)?;

    let mut summary = String::new();
    writeln!(
        summary,
        "Fringe scan, scheme {}, {} steps over [{:.4}, {:.4}] rad on {:?}",
        recipe.scheme, steps, phi_start_rad, phi_stop_rad, party
    )
    .unwrap();
    for w in &warnings {
        writeln!(summary, "  warning: {w}").unwrap();
    }
    match (&fit, &fit_error) {
        (Some(f), _) => {
            writeln!(
                summary,
                "  fitted visibility {:.4} +- {:.4} (mean rate {:.1} Hz, phase {:+.4} rad)",
                f.visibility, f.sigma, f.mean, f.phase
            )
            .unwrap();
        }
        (None, Some(e)) => {
            writeln!(summary, "  fit failed: {e}").unwrap();
        }
        _ => unreachable!(),
    }
    write_text(&out_dir.join("summary.txt"), &summary)?;

    let artifacts = ScanArtifacts {
        points,
        fit,
        fit_error,
        warnings,
        out_dir: out_dir.clone(),
        summary,
    };
    write_json(&out_dir.join("scan.json"), &artifacts)?;
    write_meta(&out_dir, started, t0)?;
    Ok(artifacts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockRunSpec {
    pub drift: DriftModel,
    pub config: LockConfig,
    pub duration_s: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl Default for LockRunSpec {
    fn default() -> Self {
        LockRunSpec {
            drift: DriftModel::random_walk(0.01),
            config: LockConfig::default(),
            duration_s: 600.0,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LockArtifacts {
    pub settled_rms_rad: f64,
    pub lock_lost: bool,
    pub final_phi_s_rad: f64,
    pub out_dir: PathBuf,
    pub summary: String,
    #[serde(skip)]
    pub trace: Vec<LockSample>,
}

/// Closed-loop stabilization run with trace CSV and a residual verdict.
pub fn run_lock(spec: &LockRunSpec) -> Result<LockArtifacts> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    let trace = closed_loop_sim(&spec.drift, &spec.config, spec.duration_s)?;
    let skip_s = (0.3 * spec.duration_s).min(60.0);
    let rms = settled_rms_error(&trace, skip_s, PI);
    let lock_lost = !(rms < LOCK_LOSS_THRESHOLD_RAD);
    let final_phi = trace.last().map(|s| s.phi_s_rad).unwrap_or(f64::NAN);

    let out_dir = resolve_out_dir(
        &spec.out_dir,
        format!("lock_seed{}", spec.config.rng_seed),
    );
    ensure_dir(&out_dir)?;
    let mut csv = String::from("t_s,phi_s_rad,ratio,error,bias_v,n_c,n_l\n");
    for s in &trace {
        writeln!(
            csv,
            "{:.3},{:.9},{:.6},{:.6},{:.9},{},{}",
            s.t_s, s.phi_s_rad, s.ratio, s.error, s.bias_v, s.n_c, s.n_l
        )
        .expect("string write");
    }
    write_text(&out_dir.join("lock_trace.csv"), &csv)?;

    let mut summary = String::new();
    writeln!(
        summary,
        "Lock run: {:?} drift, magnitude {:.4} rad, {:.0} s",
        spec.drift.process, spec.drift.magnitude_rad, spec.duration_s
    )
    .unwrap();
    writeln!(
        summary,
        "  settled rms distance from pi (after {skip_s:.0} s): {rms:.4} rad"
    )
    .unwrap();
    if lock_lost {
        writeln!(
            summary,
            "  LOCK LOST: residual above {LOCK_LOSS_THRESHOLD_RAD} rad threshold"
        )
        .unwrap();
    } else {
        writeln!(summary, "  lock held").unwrap();
    }
    write_text(&out_dir.join("summary.txt"), &summary)?;

    let artifacts = LockArtifacts {
        settled_rms_rad: rms,
        lock_lost,
        final_phi_s_rad: final_phi,
        out_dir: out_dir.clone(),
        summary,
        trace,
    };
    write_json(&out_dir.join("lock.json"), &artifacts)?;
    write_meta(&out_dir, started, t0)?;
    Ok(artifacts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub sim: SimConfig,
    pub duration_per_setting_s: f64,
    /// Classical bin separation used for the Long timestamps.
    pub delta_t_s: f64,
    /// Narrow pairing window playing the postselection role.
    pub narrow_window_s: f64,
    /// Wide window that keeps every pair.
    pub wide_window_s: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub dump_tags: bool,
}

impl Default for AttackSpec {
    fn default() -> Self {
        AttackSpec {
            sim: SimConfig::default(),
            duration_per_setting_s: 0.05,
            delta_t_s: 3e-9,
            // narrow enough that 300 ps jitter cannot pull cross-bin pairs
            // inside the window
            narrow_window_s: 1.2e-9,
            wide_window_s: 8.1e-9,
            out_dir: None,
            dump_tags: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackArtifacts {
    pub enumeration: StrategyReport,
    /// Pipeline result under narrow-window postselection.
    pub apparent: BellRunResult,
    /// Pipeline result with every pair kept.
    pub unconditioned: BellRunResult,
    pub banner: String,
    pub out_dir: PathBuf,
    pub summary: String,
}

fn attack_banner(apparent: &BellRunResult, unconditioned: &BellRunResult) -> String {
    let line = "=".repeat(66);
    format!(
        "{line}\n\
         WARNING: postselection loophole demonstration\n\
         The apparent CHSH value S = {:.3} +- {:.3} exceeds even the quantum\n\
         bound, yet every event came from a strictly local model. Matching\n\
         time slots discarded half of all pairs, and the kept subensemble\n\
         depends on the settings. The unconditioned statistics of the very\n\
         same streams give S = {:.3} +- {:.3}, inside the classical bound.\n\
         {line}\n",
        apparent.s_value, apparent.s_sigma, unconditioned.s_value, unconditioned.s_sigma
    )
}

/// Run the deterministic attack through the standard pipeline twice: once
/// with narrow-window postselection (faking a violation) and once keeping
/// all pairs (restoring the classical bound).
pub fn run_lhv_attack(spec: &AttackSpec) -> Result<AttackArtifacts> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    spec.sim.validate()?;
    if !(spec.duration_per_setting_s > 0.0) {
        return Err(Error::Config(
            "attack.duration_per_setting_s: must be positive".into(),
        ));
    }
    if !(spec.narrow_window_s > 0.0) || spec.narrow_window_s >= spec.delta_t_s {
        return Err(Error::Config(
            "attack.narrow_window_s: must be positive and below delta_t_s".into(),
        ));
    }
    if spec.wide_window_s <= spec.delta_t_s {
        return Err(Error::Config(
            "attack.wide_window_s: must exceed delta_t_s to keep mismatched pairs".into(),
        ));
    }

    let strategy = attack_strategy();
    let enumeration = evaluate(&strategy)?;

    let angles = ChshAngles::default();
    let schedule = bell_schedule(
        &angles,
        spec.duration_per_setting_s,
        spec.sim.rep_rate_hz,
    )?;
    let (alice, bob, clock) = simulate_attack(&strategy, &spec.sim, &schedule, spec.delta_t_s)?;

    let analyze = |window_s: f64| -> Result<BellRunResult> {
        let policy = CoincidencePolicy::all_slots(window_s);
        let cs = find_coincidences(
            &alice,
            &bob,
            &policy,
            &clock,
            spec.delta_t_s,
            Some(&schedule),
        )?;
        let ests = correlations_by_setting(&cs, 4)?;
        Ok(estimate_chsh(
            angles.setting_pairs(),
            ests.try_into().expect("four settings"),
        ))
    };
    let apparent = analyze(spec.narrow_window_s)?;
    let unconditioned = analyze(spec.wide_window_s)?;
    let banner = attack_banner(&apparent, &unconditioned);

    let out_dir = resolve_out_dir(
        &spec.out_dir,
        format!("lhv_attack_seed{}", spec.sim.rng_seed),
    );
    ensure_dir(&out_dir)?;
    write_json(&out_dir.join("attack_strategy.json"), &strategy)?;
    write_json(&out_dir.join("attack_report.json"), &enumeration)?;
    write_json(&out_dir.join("apparent_result.json"), &apparent)?;
    write_json(&out_dir.join("unconditioned_result.json"), &unconditioned)?;
    if spec.dump_tags {
        write_tags_csv(&out_dir.join("tags_alice.csv"), &alice)?;
        write_tags_csv(&out_dir.join("tags_bob.csv"), &bob)?;
        write_json(
            &out_dir.join("tags_header.json"),
            &serde_json::json!({
                "config": spec.sim,
                "clock": clock,
                "schedule": schedule,
                "delta_t_s": spec.delta_t_s,
                "source": "local-hidden-variable attack streams",
            }),
        )?;
    }

    let mut summary = banner.clone();
    writeln!(
        summary,
        "enumeration: S_post = {}, keep rate 1/2 per pair, S_full = {:.3}",
        fmt_opt(enumeration.s_postselected),
        enumeration.s_full
    )
    .unwrap();
    writeln!(
        summary,
        "pipeline:    S_narrow = {:.4} +- {:.4}, S_wide = {:.4} +- {:.4}",
        apparent.s_value, apparent.s_sigma, unconditioned.s_value, unconditioned.s_sigma
    )
    .unwrap();
    write_text(&out_dir.join("summary.txt"), &summary)?;
    write_meta(&out_dir, started, t0)?;

    Ok(AttackArtifacts {
        enumeration,
        apparent,
        unconditioned,
        banner,
        out_dir,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeArtifacts {
    pub outcome: OptimizeOutcome,
    pub out_dir: PathBuf,
    pub summary: String,
}

/// Strategy search with files: best strategy, its report, and the ascent
/// history.
pub fn run_lhv_optimize(spec: &OptimizeSpec, out_dir: Option<&Path>) -> Result<OptimizeArtifacts> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    let outcome = optimize_strategy(spec)?;

    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => PathBuf::from(format!("lhv_optimize_seed{}", spec.seed)),
    };
    ensure_dir(&dir)?;
    write_json(&dir.join("optimized_strategy.json"), &outcome.strategy)?;
    write_json(&dir.join("optimized_report.json"), &outcome.report)?;
    write_json(&dir.join("optimize_outcome.json"), &outcome)?;

    let mut summary = String::new();
    writeln!(
        summary,
        "Strategy search: {:?}, n_lambda {}, {} restarts x {} sweeps",
        spec.objective, spec.n_lambda, spec.restarts, spec.sweeps
    )
    .unwrap();
    writeln!(
        summary,
        "  best objective {:.6} from restart {}",
        outcome.objective_value, outcome.restart
    )
    .unwrap();
    writeln!(
        summary,
        "  S_post = {}, S_full = {:.4}",
        fmt_opt(outcome.report.s_postselected),
        outcome.report.s_full
    )
    .unwrap();
    write_text(&dir.join("summary.txt"), &summary)?;
    write_meta(&dir, started, t0)?;
    Ok(OptimizeArtifacts {
        outcome,
        out_dir: dir,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramArtifacts {
    pub alice: Histogram,
    pub bob: Histogram,
    pub out_dir: PathBuf,
    pub summary: String,
}

/// Fixed-setting acquisition folded into per-party arrival histograms.
pub fn run_histogram(recipe: &ExperimentRecipe) -> Result<HistogramArtifacts> {
    let started = SystemTime::now();
    let t0 = Instant::now();
    recipe.validate()?;
    let mut sim = recipe.sim.clone();
    sim.duration_s = recipe.duration_per_setting_s;
    let (alice, bob, clock) = run_simulation(&sim, &recipe.layout)?;
    let bin = histogram_bin_s(&sim);
    let ha = histogram(&alice, &clock, bin)?;
    let hb = histogram(&bob, &clock, bin)?;

    let out_dir = resolve_out_dir(
        &recipe.out_dir,
        format!("histogram_{}_seed{}", recipe.scheme, recipe.sim.rng_seed),
    );
    ensure_dir(&out_dir)?;
    write_histogram_csv(&out_dir.join("alice_histogram.csv"), &ha)?;
    write_histogram_csv(&out_dir.join("bob_histogram.csv"), &hb)?;

    let half = 0.5 * recipe.layout.delta_t_s;
    let mut summary = String::new();
    writeln!(summary, "Arrival histograms, scheme {}", recipe.scheme).unwrap();
    for (name, h) in [("alice", &ha), ("bob", &hb)] {
        let early = h.slot_area(-recipe.layout.delta_t_s, half);
        let central = h.slot_area(0.0, half);
        let late = h.slot_area(recipe.layout.delta_t_s, half);
        writeln!(
            summary,
            "  {name}: early {early}, central {central}, late {late} (total {})",
            h.total()
        )
        .unwrap();
    }
    write_text(&out_dir.join("summary.txt"), &summary)?;
    write_meta(&out_dir, started, t0)?;
    Ok(HistogramArtifacts {
        alice: ha,
        bob: hb,
        out_dir,
        summary,
    })
}
