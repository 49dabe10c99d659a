//! End-to-end acceptance checks, one test per numbered criterion. Each test
//! prints a single verdict line (visible with --nocapture, or in the panic
//! output when a criterion fails) with the measured numbers.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use franson::analysis::histogram;
use franson::eventsim::{run_simulation, SimConfig};
use franson::lhv::{attack_strategy, evaluate, optimize_strategy, Objective, OptimizeSpec};
use franson::lock::{closed_loop_sim, settled_rms_error, DriftModel, LockConfig};
use franson::optics::{joint_distribution, OpticalLayout, Slot};
use franson::quantum::{
    bell_state, chsh, correlation, eigenvalues2, hermitian_deviation, joint_probability,
    povm_gamma, povm_pi, projector_psi, Mat2, MeasurementSetting, Outcome, Scheme, CHSH_ANGLES,
};
use franson::recipe::{ExperimentRecipe, SchemeId};
use franson::runner::{run_bell, run_lhv_attack, AttackSpec};
use tempfile::TempDir;

/// Prints the verdict line exactly once, also when the test panics midway.
struct Verdict {
    n: usize,
    label: &'static str,
    passed: bool,
    detail: String,
    t0: Instant,
}

fn criterion(n: usize, label: &'static str) -> Verdict {
    Verdict {
        n,
        label,
        passed: false,
        detail: String::new(),
        t0: Instant::now(),
    }
}

impl Verdict {
    fn pass(mut self, detail: String) {
        self.passed = true;
        self.detail = detail;
    }
}

impl Drop for Verdict {
    fn drop(&mut self) {
        let state = if self.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:2} ({}): {state} [{:.1} s] {}",
            self.n,
            self.label,
            self.t0.elapsed().as_secs_f64(),
            self.detail
        );
        if !self.passed {
            // repeat on stderr so the line survives output capture
            eprintln!("criterion {:2} ({}): FAIL", self.n, self.label);
        }
    }
}

fn max_entry(m: &Mat2) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

#[test]
fn criterion_01_operator_algebra() {
    let v = criterion(1, "operator algebra");
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..32 {
        let phi = 2.0 * PI * k as f64 / 32.0;
        let phi_s = 2.0 * PI * ((k as f64 * 7.0 / 32.0) % 1.0);
        let families: [[Mat2; 2]; 3] = [
            [
                projector_psi(Outcome::Plus, phi),
                projector_psi(Outcome::Minus, phi),
            ],
            [povm_gamma(Outcome::Plus, phi), povm_gamma(Outcome::Minus, phi)],
            [
                povm_pi(Outcome::Plus, phi, phi_s, phi_s - PI),
                povm_pi(Outcome::Minus, phi, phi_s, phi_s - PI),
            ],
        ];
        for pair in &families {
            worst = worst.max(max_entry(&(pair[0] + pair[1] - Mat2::identity())));
            for m in pair {
                worst = worst.max(hermitian_deviation(m));
                let (lo, _) = eigenvalues2(m);
                worst = worst.max((-lo).max(0.0));
            }
        }
        // mixture identity for the no-postselection element
        let gamma = povm_gamma(Outcome::Plus, phi);
        let mix = Mat2::identity().scale(0.25) + projector_psi(Outcome::Plus, phi).scale(0.5);
        worst = worst.max(max_entry(&(gamma - mix)));
        // switched element at phi_S - phi_L = pi interpolates identity/projector
        let pi_el = povm_pi(Outcome::Plus, phi, phi_s, phi_s - PI);
        let interp = Mat2::identity().scale(0.5 * (0.5 * phi_s).cos().powi(2))
            + projector_psi(Outcome::Plus, phi).scale((0.5 * phi_s).sin().powi(2));
        worst = worst.max(max_entry(&(pi_el - interp)));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(worst < 1e-12, "worst operator deviation {worst:.3e}");
    assert!(elapsed < 1.0, "took {elapsed:.3} s");
    v.pass(format!("worst deviation {worst:.1e} over 32-point grid"));
}

#[test]
fn criterion_02_joint_probability_identity() {
    let v = criterion(2, "analytic P_ab identity");
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for vi in 0..5 {
        let vis = vi as f64 / 4.0;
        let state = bell_state(vis).unwrap();
        for i in 0..16 {
            let phi_a = 2.0 * PI * i as f64 / 16.0;
            for j in 0..16 {
                let phi_b = 2.0 * PI * j as f64 / 16.0 - PI;
                for a in Outcome::BOTH {
                    for b in Outcome::BOTH {
                        let p = joint_probability(
                            &state,
                            &projector_psi(a, phi_a),
                            &projector_psi(b, phi_b),
                        )
                        .unwrap();
                        let expect = 0.25
                            * (1.0 + a.sign() * b.sign() * vis * (phi_a + phi_b).cos());
                        worst = worst.max((p - expect).abs());
                    }
                }
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(worst < 1e-12, "worst |P - fringe law| = {worst:.3e}");
    assert!(elapsed < 1.0, "took {elapsed:.3} s");
    v.pass(format!("worst |P - fringe law| {worst:.1e} on 16x16x5 grid"));
}

#[test]
fn criterion_03_chsh_reference_values() {
    let v = criterion(3, "CHSH reference values");
    let [a, ap, b, bp] = CHSH_ANGLES;
    let s1 = chsh(&bell_state(1.0).unwrap(), a, ap, b, bp, Scheme::PassivePostselected);
    let s2 = chsh(
        &bell_state(1.0 / 2f64.sqrt()).unwrap(),
        a,
        ap,
        b,
        bp,
        Scheme::PassivePostselected,
    );
    let s3 = chsh(&bell_state(1.0).unwrap(), a, ap, b, bp, Scheme::PassiveFull);
    let max8 = 2.0 * 2f64.sqrt();
    assert!((s1 - max8).abs() < 1e-9, "postselected ideal S = {s1}");
    assert!((s2 - 2.0).abs() < 1e-9, "V = 1/sqrt2 gives S = {s2}");
    assert!((s3 - max8 / 4.0).abs() < 1e-9, "no-postselection S = {s3}");
    v.pass(format!("S = {s1:.6}, {s2:.6}, {s3:.6}"));
}

fn desk_scale_recipe(scheme: SchemeId, dir: &Path, seed: u64) -> ExperimentRecipe {
    let mut recipe = ExperimentRecipe::preset(scheme);
    // 0.66 s x 76 MHz x 0.02 pairs/pulse is just above 1e6 pairs per setting
    recipe.duration_per_setting_s = 0.66;
    recipe.sim.rng_seed = seed;
    recipe.write_histograms = false;
    recipe.out_dir = Some(dir.to_path_buf());
    recipe
}

#[test]
fn criterion_04_reference_values_at_desk_scale() {
    let v = criterion(4, "desk-scale S and V for all schemes");
    let t0 = Instant::now();
    let tmp = TempDir::new().unwrap();

    let r2 = run_bell(&desk_scale_recipe(SchemeId::II, &tmp.path().join("ii"), 41)).unwrap();
    let vis = r2.result.visibility.value;
    let s2 = r2.result.s_value;
    assert!(
        (0.21..=0.26).contains(&vis),
        "scheme II V_exp = {vis:.4} outside [0.21, 0.26]"
    );
    assert!(
        (0.63..=0.71).contains(&s2),
        "scheme II S_exp = {s2:.4} outside [0.63, 0.71]"
    );

    let r3 = run_bell(&desk_scale_recipe(SchemeId::III, &tmp.path().join("iii"), 42)).unwrap();
    let expect3 = 2.0 * 2f64.sqrt() * 0.89;
    let miss3 = (r3.result.s_value - expect3).abs();
    assert!(
        miss3 < 3.0 * r3.result.s_sigma,
        "scheme III S = {:.4} vs {expect3:.4}, {:.1} sigma away",
        r3.result.s_value,
        miss3 / r3.result.s_sigma
    );

    let r1 = run_bell(&desk_scale_recipe(SchemeId::I, &tmp.path().join("i"), 43)).unwrap();
    let expect1 = 2.0 * 2f64.sqrt() * 0.95;
    let miss1 = (r1.result.s_value - expect1).abs();
    assert!(
        miss1 < 3.0 * r1.result.s_sigma,
        "scheme I S = {:.4} vs {expect1:.4}, {:.1} sigma away",
        r1.result.s_value,
        miss1 / r1.result.s_sigma
    );

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1} s");
    v.pass(format!(
        "II: V {vis:.3} S {s2:.3}; III: S {:.3} ({:.1} sd); I: S {:.3} ({:.1} sd)",
        r3.result.s_value,
        miss3 / r3.result.s_sigma,
        r1.result.s_value,
        miss1 / r1.result.s_sigma
    ))
}

#[test]
fn criterion_05_histogram_shapes() {
    let v = criterion(5, "histogram peak structure");

    // active scheme, ideal switch, no timing noise: lateral slots dead empty
    let mut sim = SimConfig::default();
    sim.duration_s = 0.05;
    sim.jitter_sigma_s = 0.0;
    sim.rng_seed = 5;
    let layout = OpticalLayout::new(Scheme::ActiveSwitch, 0.89);
    let (alice, bob, clock) = run_simulation(&sim, &layout).unwrap();
    let mut lateral = 0u64;
    let mut central = 0u64;
    for stream in [&alice, &bob] {
        let h = histogram(stream, &clock, 0.162e-9).unwrap();
        lateral += h.slot_area(-layout.delta_t_s, 1.5e-9) + h.slot_area(layout.delta_t_s, 1.5e-9);
        central += h.slot_area(0.0, 1.5e-9);
    }
    assert!(central > 0);
    assert_eq!(lateral, 0, "noise-free active run leaked {lateral} lateral counts");

    // passive scheme at one million detections: 1:2:1 within 3 sigma
    let mut sim = SimConfig::default();
    sim.duration_s = 1.32;
    sim.rng_seed = 6;
    let layout = OpticalLayout::new(Scheme::PassiveFull, 0.95);
    let (alice, _, clock) = run_simulation(&sim, &layout).unwrap();
    let h = histogram(&alice, &clock, 0.162e-9).unwrap();
    let areas = [
        h.slot_area(-layout.delta_t_s, 1.5e-9),
        h.slot_area(0.0, 1.5e-9),
        h.slot_area(layout.delta_t_s, 1.5e-9),
    ];
    let n: u64 = areas.iter().sum();
    assert!(n >= 1_000_000, "only {n} slotted events");
    let mut worst_sd = 0.0f64;
    for (area, frac) in areas.iter().zip([0.25, 0.5, 0.25]) {
        let sigma = (frac * (1.0 - frac) / n as f64).sqrt();
        let sd = ((*area as f64 / n as f64) - frac).abs() / sigma;
        worst_sd = worst_sd.max(sd);
        assert!(sd < 3.0, "peak fraction {:.4} vs {frac}, {sd:.1} sigma", *area as f64 / n as f64);
    }
    v.pass(format!(
        "active lateral = 0 of {central}; passive 1:2:1 at n = {n}, worst {worst_sd:.1} sd"
    ));
}

#[test]
fn criterion_06_slot_structure() {
    let v = criterion(6, "slot joint structure");
    let mut layout = OpticalLayout::new(Scheme::PassiveFull, 1.0);
    let mut worst_central = 0.0f64;
    for i in 0..13 {
        for j in 0..13 {
            layout.alice.analyzer_phase = 2.0 * PI * i as f64 / 13.0;
            layout.bob.analyzer_phase = 2.0 * PI * j as f64 / 13.0 - PI;
            let dist = joint_distribution(&layout);
            assert_eq!(
                dist.slot_pair_prob(Slot::Early, Slot::Late),
                0.0,
                "early/late slot pair must be forbidden"
            );
            assert_eq!(dist.slot_pair_prob(Slot::Late, Slot::Early), 0.0);
            worst_central = worst_central
                .max((dist.slot_pair_prob(Slot::Central, Slot::Central) - 0.25).abs());
        }
    }
    assert!(worst_central < 1e-9, "P(central, central) off by {worst_central:.2e}");
    v.pass(format!(
        "cross slots exactly 0, |P(c,c) - 1/4| <= {worst_central:.1e} over angle grid"
    ));
}

#[test]
fn criterion_07_monte_carlo_analytic_closure() {
    let v = criterion(7, "Monte-Carlo vs analytic correlations");
    let tmp = TempDir::new().unwrap();
    let mut detail = String::new();
    for (scheme, seed) in [(SchemeId::I, 11), (SchemeId::II, 12), (SchemeId::III, 13)] {
        let mut recipe = ExperimentRecipe::preset(scheme);
        recipe.duration_per_setting_s = 0.27;
        recipe.sim.rng_seed = seed;
        recipe.write_histograms = false;
        recipe.out_dir = Some(tmp.path().join(format!("{scheme}")));
        let art = run_bell(&recipe).unwrap();

        let state = bell_state(recipe.layout.visibility).unwrap();
        let mut kept = 0u64;
        let mut worst_sd = 0.0f64;
        for (est, (phi_a, phi_b)) in art.result.correlations.iter().zip(art.result.settings) {
            let analytic = correlation(
                &state,
                &MeasurementSetting::for_scheme(scheme.scheme(), phi_a),
                &MeasurementSetting::for_scheme(scheme.scheme(), phi_b),
            );
            let sd = (est.e - analytic).abs() / est.sigma;
            worst_sd = worst_sd.max(sd);
            kept += est.counts.iter().sum::<u64>();
            assert!(
                sd < 4.0,
                "scheme {scheme} at ({phi_a:.3}, {phi_b:.3}): E = {:.4} vs {analytic:.4} ({sd:.1} sigma)",
                est.e
            );
        }
        assert!(kept >= 100_000, "scheme {scheme}: only {kept} coincidences");
        detail.push_str(&format!("{scheme}: n {kept} worst {worst_sd:.1} sd; "));
    }
    v.pass(detail);
}

#[test]
fn criterion_08_lhv_attack_and_search() {
    let v = criterion(8, "postselection attack");
    // exact enumeration
    let report = evaluate(&attack_strategy()).unwrap();
    assert!((report.s_postselected.unwrap() - 4.0).abs() < 1e-12);
    assert!((report.s_full - 2.0).abs() < 1e-12);
    for row in report.keep_rate {
        for keep in row {
            assert!((keep - 0.5).abs() < 1e-12, "keep rate {keep}");
        }
    }

    // the same strategy through the standard tag pipeline
    let tmp = TempDir::new().unwrap();
    let spec = AttackSpec {
        duration_per_setting_s: 0.15,
        out_dir: Some(tmp.path().to_path_buf()),
        ..AttackSpec::default()
    };
    let art = run_lhv_attack(&spec).unwrap();
    let kept: u64 = art
        .apparent
        .correlations
        .iter()
        .map(|c| c.counts.iter().sum::<u64>())
        .sum();
    assert!(kept >= 100_000, "only {kept} kept events");
    let miss = (art.apparent.s_value - 4.0).abs();
    assert!(
        miss < 4.0 * art.apparent.s_sigma + 1e-3,
        "apparent S = {:.4} +- {:.4}",
        art.apparent.s_value,
        art.apparent.s_sigma
    );

    // random-restart search rediscovers the algebraic maximum
    let t0 = Instant::now();
    let out = optimize_strategy(&OptimizeSpec {
        n_lambda: 2,
        restarts: 10,
        sweeps: 16,
        seed: 3,
        objective: Objective::MaximizePostselectedS,
        ..OptimizeSpec::default()
    })
    .unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    assert!((out.objective_value - 4.0).abs() < 1e-9, "search reached {}", out.objective_value);
    assert!(elapsed < 30.0, "search took {elapsed:.1} s");
    v.pass(format!(
        "enumeration exact; pipeline S = {:.3} at n = {kept}; search hit 4 in {elapsed:.1} s",
        art.apparent.s_value
    ));
}

#[test]
fn criterion_09_lock_loop() {
    let v = criterion(9, "switch phase lock");
    // ten minutes against the default slow random walk
    let trace = closed_loop_sim(&DriftModel::random_walk(0.01), &LockConfig::default(), 600.0)
        .unwrap();
    let rms = settled_rms_error(&trace, 120.0, PI);
    assert!(rms < 0.05, "settled rms {rms:.4} rad");

    // a fixed switch-phase offset shows up as the predicted visibility loss
    let tmp = TempDir::new().unwrap();
    let mut detail = format!("rms {rms:.3} rad; ");
    for (k, (off_a, off_b)) in [(0.5, 0.0), (0.4, 0.8)].iter().enumerate() {
        let mut recipe = ExperimentRecipe::preset(SchemeId::III);
        recipe.layout.visibility = 0.95;
        recipe.layout.alice.switch_phase = PI - off_a;
        recipe.layout.bob.switch_phase = PI - off_b;
        recipe.duration_per_setting_s = 0.3;
        recipe.sim.rng_seed = 90 + k as u64;
        recipe.write_histograms = false;
        recipe.out_dir = Some(tmp.path().join(format!("offset{k}")));
        let art = run_bell(&recipe).unwrap();
        let predicted = 0.95
            * (0.5 * (PI - off_a)).sin().powi(2)
            * (0.5 * (PI - off_b)).sin().powi(2);
        let vis = art.result.visibility;
        let sd = (vis.value - predicted).abs() / vis.sigma;
        assert!(
            sd < 3.0,
            "offsets ({off_a}, {off_b}): V_exp = {:.4} vs {predicted:.4} ({sd:.1} sigma)",
            vis.value
        );
        detail.push_str(&format!("V {:.3} vs {predicted:.3} ({sd:.1} sd); ", vis.value));
    }
    v.pass(detail);
}

#[test]
fn criterion_10_determinism_across_threads() {
    let v = criterion(10, "thread-count determinism");
    let mut dumps: Vec<(Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::new();
    for threads in [1usize, 2, 4] {
        let tmp = TempDir::new().unwrap();
        let mut recipe = ExperimentRecipe::preset(SchemeId::I);
        recipe.duration_per_setting_s = 0.03;
        recipe.sim.rng_seed = 1234;
        recipe.dump_tags = true;
        recipe.out_dir = Some(tmp.path().to_path_buf());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_bell(&recipe).unwrap());
        dumps.push((
            std::fs::read(tmp.path().join("tags_alice.csv")).unwrap(),
            std::fs::read(tmp.path().join("tags_bob.csv")).unwrap(),
            std::fs::read(tmp.path().join("tags_header.json")).unwrap(),
            std::fs::read(tmp.path().join("result.json")).unwrap(),
        ));
    }
    assert_eq!(dumps[0], dumps[1], "1-thread and 2-thread artifacts differ");
    assert_eq!(dumps[0], dumps[2], "1-thread and 4-thread artifacts differ");
    assert!(!dumps[0].0.is_empty() && !dumps[0].3.is_empty());
    v.pass(format!(
        "tag dumps ({} + {} bytes) and result JSON identical for 1/2/4 threads",
        dumps[0].0.len(),
        dumps[0].1.len()
    ));
}
