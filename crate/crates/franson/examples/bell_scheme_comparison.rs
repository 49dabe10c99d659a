//! Runs the same four-setting Bell test through all three measurement
//! schemes and prints the resulting S values side by side. Scheme II never
//! violates the classical bound no matter how good the source is; the
//! switched scheme recovers the violation without postselection.
//!
//!   cargo run --example bell_scheme_comparison

use franson::recipe::{ExperimentRecipe, SchemeId};
use franson::runner::run_bell;
use std::path::PathBuf;

fn main() {
    println!("scheme  source V   S          sigma    vs bound 2      implied V");
    for scheme in SchemeId::ALL {
        let mut recipe = ExperimentRecipe::preset(scheme);
        recipe.duration_per_setting_s = 0.1;
        recipe.sim.rng_seed = 2024;
        recipe.out_dir = Some(PathBuf::from(format!(
            "target/examples_out/bell_{scheme}"
        )));
        let art = run_bell(&recipe).unwrap();
        let r = &art.result;
        let verdict = if r.significance_sd > 3.0 {
            format!("violated ({:+.0} sd)", r.significance_sd)
        } else {
            format!("not violated ({:+.0} sd)", r.significance_sd)
        };
        println!(
            "{scheme:<6}  {:<8.2}   {:<8.4}   {:<6.4}   {verdict:<15}   {:.4} +- {:.4}",
            recipe.layout.visibility, r.s_value, r.s_sigma, r.visibility.value, r.visibility.sigma,
        );
    }
    println!();
    println!("scheme I postselects the central slot and pays for it with the");
    println!("loophole; scheme II keeps every event and the fringe amplitude");
    println!("collapses by 4; scheme III moves the choice into a fast switch");
    println!("so every detected pair counts and S still reaches 2 sqrt 2 x V.");
    println!("full artifacts under target/examples_out/");
}
