//! Arrival-time slot weights as the output switch phase varies. An ideal
//! switch (phi_S = pi) empties the side slots entirely; every other setting
//! leaves residue, and the histogram alone cannot distinguish phi_S from
//! 2 pi - phi_S even though the correlations can.
//!
//!   cargo run --example switch_histograms

use franson::analysis::histogram;
use franson::eventsim::{run_simulation, SimConfig};
use franson::optics::{detector_histogram, OpticalLayout, Party};
use franson::quantum::{correlation, MeasurementSetting, Scheme};
use std::f64::consts::PI;

fn main() {
    let mut layout = OpticalLayout::new(Scheme::ActiveSwitch, 1.0);

    println!("analytic slot weights vs switch phase (Alice):");
    println!("  phi_S/pi    early   central    late");
    for k in 0..=8 {
        let phi_s = PI * k as f64 / 8.0;
        layout.alice.switch_phase = phi_s;
        layout.alice.long_bin_phase = Some(phi_s - PI);
        let [e, c, l] = detector_histogram(&layout, Party::Alice);
        println!("  {:8.3}  {e:7.4}  {c:8.4}  {l:7.4}", phi_s / PI);
    }

    // the reflection pair: with the interferometer arm held at a fixed
    // phase, phi_S and 2 pi - phi_S give identical slot weights but
    // different correlations
    let state = franson::quantum::bell_state(1.0).unwrap();
    let phi_s = 0.6 * PI;
    let arm = phi_s - PI;
    println!("\nreflection ambiguity (long-arm phase fixed at {:.2} pi):", arm / PI);
    for p in [phi_s, 2.0 * PI - phi_s] {
        layout.alice.switch_phase = p;
        layout.alice.long_bin_phase = Some(arm);
        let [e, c, l] = detector_histogram(&layout, Party::Alice);
        let sa = MeasurementSetting::active_with_switch(0.3, p).with_long_bin_phase(arm);
        let sb = MeasurementSetting::active(0.0);
        let corr = correlation(&state, &sa, &sb);
        println!(
            "  phi_S = {:.3} pi: histogram ({e:.4}, {c:.4}, {l:.4}), E = {corr:+.4}",
            p / PI
        );
    }
    println!("  (identical slot weights; monitoring counts alone cannot tell");
    println!("   which side of pi the switch sits on, which is why the lock");
    println!("   needs a slope sign estimator)");

    // Monte Carlo cross-check at the ideal point
    let mut sim = SimConfig::default();
    sim.duration_s = 0.02;
    sim.jitter_sigma_s = 0.0;
    sim.rng_seed = 7;
    let ideal = OpticalLayout::new(Scheme::ActiveSwitch, 1.0);
    let (alice, _, clock) = run_simulation(&sim, &ideal).unwrap();
    let h = histogram(&alice, &clock, 0.162e-9).unwrap();
    let half = 0.5 * ideal.delta_t_s;
    let lateral = h.slot_area(-ideal.delta_t_s, half) + h.slot_area(ideal.delta_t_s, half);
    println!(
        "\nsimulated ideal switch, no jitter: {} central counts, {} lateral",
        h.slot_area(0.0, half),
        lateral
    );
}
