//! Walks through the three measurement families as explicit 2x2 operators
//! on the {Short, Long} qubit and checks their algebra numerically.
//!
//!   cargo run --example operator_algebra

use franson::quantum::{
    eigenvalues2, hermitian_deviation, povm_gamma, povm_pi, projector_psi, Mat2, Outcome,
};
use std::f64::consts::PI;

fn max_offdiag(m: &Mat2) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

fn main() {
    println!("postselected analyzer projector at phi = 0:");
    let p = projector_psi(Outcome::Plus, 0.0);
    for r in 0..2 {
        println!(
            "  [{:+.3}{:+.3}i  {:+.3}{:+.3}i]",
            p[(r, 0)].re,
            p[(r, 0)].im,
            p[(r, 1)].re,
            p[(r, 1)].im
        );
    }

    // completeness and positivity over a phase grid, for all three families
    let mut worst_complete = 0.0f64;
    let mut worst_negative = 0.0f64;
    for k in 0..32 {
        let phi = 2.0 * PI * k as f64 / 32.0;
        for (name, plus, minus) in [
            (
                "projector",
                projector_psi(Outcome::Plus, phi),
                projector_psi(Outcome::Minus, phi),
            ),
            (
                "no-postselection",
                povm_gamma(Outcome::Plus, phi),
                povm_gamma(Outcome::Minus, phi),
            ),
            (
                "switched",
                povm_pi(Outcome::Plus, phi, 0.7, 0.7 - PI),
                povm_pi(Outcome::Minus, phi, 0.7, 0.7 - PI),
            ),
        ] {
            let sum = plus + minus;
            let dev = max_offdiag(&(sum - Mat2::identity()));
            worst_complete = worst_complete.max(dev);
            for m in [&plus, &minus] {
                assert!(hermitian_deviation(m) < 1e-12, "{name} not hermitian");
                let (lo, _) = eigenvalues2(m);
                worst_negative = worst_negative.min(lo);
            }
        }
    }
    println!("\ncompleteness: worst |E+ + E- - 1| entry over 32 phases = {worst_complete:.2e}");
    println!("positivity:   most negative eigenvalue = {worst_negative:.2e}");

    // the no-postselection element is an explicit mixture: 1/4 identity
    // plus half the projector, so its fringe amplitude drops to 1/4
    let phi = 1.234;
    let gamma = povm_gamma(Outcome::Plus, phi);
    let mix = Mat2::identity() * num_complex::Complex64::new(0.25, 0.0)
        + projector_psi(Outcome::Plus, phi) * num_complex::Complex64::new(0.5, 0.0);
    println!(
        "\nmixture identity:  max |Gamma - (1/4 + P/2)| = {:.2e}",
        max_offdiag(&(gamma - mix))
    );
    let (lo, hi) = eigenvalues2(&gamma);
    println!("Gamma eigenvalues: {lo:.4}, {hi:.4}  (flat 1/4 floor + 1/2 swing)");

    // sweeping the switch phase interpolates between a useless measurement
    // and the clean projector
    println!("\nswitched element vs switch phase (long-bin phase = switch - pi):");
    println!("  phi_S     eigenvalues         distance to projector");
    for phi_s in [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI] {
        let pi_el = povm_pi(Outcome::Plus, phi, phi_s, phi_s - PI);
        let (lo, hi) = eigenvalues2(&pi_el);
        let d = max_offdiag(&(pi_el - projector_psi(Outcome::Plus, phi)));
        println!("  {phi_s:5.3}   ({lo:.4}, {hi:.4})    {d:.3}");
    }
    println!("\nat phi_S = pi the switch routes everything into the central slot");
    println!("and the measurement becomes the ideal analyzer projector.");
}
