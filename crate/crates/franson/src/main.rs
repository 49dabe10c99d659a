//! Thin command-line front end. All substance lives in the library; this
//! file only parses flags, builds the corresponding spec structs, calls one
//! runner function, and prints its summary.

use clap::{Args, Parser, Subcommand};
use std::f64::consts::PI;
use std::path::PathBuf;

use franson::lhv::{Objective, OptimizeSpec, SettingsGrid};
use franson::lock::{DriftModel, LockConfig, PidGains};
use franson::optics::Party;
use franson::recipe::{ExperimentRecipe, SchemeId};
use franson::runner::{
    run_bell, run_histogram, run_lhv_attack, run_lhv_optimize, run_lock, run_scan, AttackSpec,
    LockRunSpec,
};
use franson::{Error, Result};

#[derive(Parser)]
#[command(
    name = "franson",
    version,
    about = "Desk-scale simulator for time-bin Bell tests: three measurement \
             schemes, coincidence analysis, an interferometer phase lock, and \
             a local-model attack that fakes a violation through postselection."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Four-setting Bell test with JSON results and histograms
    Bell(RecipeFlags),
    /// Coincidence-rate fringe scan over one analyzer phase, with a fit
    Scan {
        #[command(flatten)]
        recipe: RecipeFlags,
        /// Which analyzer to move
        #[arg(long, default_value = "bob", value_parser = parse_party)]
        party: Party,
        /// Scan start phase in radians
        #[arg(long, default_value_t = 0.0, value_name = "RAD")]
        start_rad: f64,
        /// Scan stop phase in radians
        #[arg(long, default_value_t = 2.0 * PI, value_name = "RAD")]
        stop_rad: f64,
        /// Number of scan points (at least 4)
        #[arg(long, default_value_t = 16)]
        steps: usize,
    },
    /// Closed-loop phase stabilization run with a trace CSV
    Lock(LockFlags),
    /// Local-hidden-variable strategies: run the attack or search for one
    #[command(subcommand)]
    Lhv(LhvCommand),
    /// Per-party arrival-time histograms at a fixed setting
    Histogram(RecipeFlags),
}

#[derive(Args, Clone)]
struct RecipeFlags {
    /// Recipe JSON file; the flags below override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Measurement scheme: I (postselected), II (no postselection), III (switched)
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<SchemeId>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Coincidence window in nanoseconds
    #[arg(long, value_name = "NS")]
    window_ns: Option<f64>,
    /// Source visibility in [0, 1]
    #[arg(long)]
    visibility: Option<f64>,
    /// Acquisition time per setting in seconds
    #[arg(long, value_name = "S")]
    duration_s: Option<f64>,
    /// Output directory (default: derived from scheme and seed)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write raw tag CSVs
    #[arg(long)]
    dump_tags: bool,
    /// Accept a window/scheme combination outside the defaults
    #[arg(long)]
    allow_policy_mismatch: bool,
}

#[derive(Args, Clone)]
struct LockFlags {
    /// Run length in seconds
    #[arg(long, default_value_t = 600.0, value_name = "S")]
    duration_s: f64,
    /// Drift process acting on the stabilized phase
    #[arg(long, default_value = "random-walk", value_parser = ["random-walk", "sinusoidal", "none"])]
    drift: String,
    /// Drift magnitude in radians (random-walk: per time constant; sinusoidal: amplitude)
    #[arg(long, default_value_t = 0.01, value_name = "RAD")]
    drift_mag: f64,
    /// Drift time constant or period in seconds
    #[arg(long, default_value_t = 30.0, value_name = "S")]
    drift_period_s: f64,
    /// Proportional gain
    #[arg(long)]
    kp: Option<f64>,
    /// Integral gain
    #[arg(long)]
    ki: Option<f64>,
    /// Derivative gain
    #[arg(long)]
    kd: Option<f64>,
    /// Starting phase in radians (the loop pulls toward pi)
    #[arg(long, value_name = "RAD")]
    initial_phi_rad: Option<f64>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
enum LhvCommand {
    /// Run the fixed two-state attack through the full pipeline
    Attack {
        /// RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Acquisition time per setting in seconds
        #[arg(long, value_name = "S")]
        duration_s: Option<f64>,
        /// Narrow pairing window (the postselection) in nanoseconds
        #[arg(long, value_name = "NS")]
        window_ns: Option<f64>,
        /// Wide window that keeps every pair, in nanoseconds
        #[arg(long, value_name = "NS")]
        wide_window_ns: Option<f64>,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Also write raw tag CSVs
        #[arg(long)]
        dump_tags: bool,
    },
    /// Search for strategies by stochastic coordinate ascent
    Optimize {
        /// RNG seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of hidden states
        #[arg(long, default_value_t = 4)]
        n_lambda: usize,
        /// Independent random restarts
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Ascent sweeps per restart
        #[arg(long, default_value_t = 24)]
        sweeps: usize,
        /// Objective: maximize postselected S, or imitate quantum statistics
        #[arg(long, default_value = "max-post-s", value_parser = ["max-post-s", "fit-quantum"])]
        objective: String,
        /// Target visibility for the fit-quantum objective
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn parse_scheme(s: &str) -> Result<SchemeId, String> {
    SchemeId::parse(s).map_err(|e| e.to_string())
}

fn parse_party(s: &str) -> Result<Party, String> {
    match s.trim().to_lowercase().as_str() {
        "alice" | "a" => Ok(Party::Alice),
        "bob" | "b" => Ok(Party::Bob),
        other => Err(format!("unknown party '{other}', expected alice or bob")),
    }
}

/// Layer the command-line overrides onto a recipe loaded from file or built
/// from the scheme preset. Switching schemes swaps in that scheme's default
/// coincidence policy so the result still validates.
fn build_recipe(flags: &RecipeFlags) -> Result<ExperimentRecipe> {
    let mut recipe = match &flags.config {
        Some(path) => ExperimentRecipe::from_json_file(path)?,
        None => ExperimentRecipe::preset(flags.scheme.unwrap_or(SchemeId::I)),
    };
    if let Some(scheme) = flags.scheme {
        if scheme != recipe.scheme {
            recipe.scheme = scheme;
            recipe.layout.scheme = scheme.scheme();
            recipe.policy = ExperimentRecipe::preset(scheme).policy;
        }
    }
    if let Some(seed) = flags.seed {
        recipe.sim.rng_seed = seed;
    }
    if let Some(w) = flags.window_ns {
        recipe.policy.window_s = w * 1e-9;
    }
    if let Some(v) = flags.visibility {
        recipe.layout.visibility = v;
    }
    if let Some(d) = flags.duration_s {
        recipe.duration_per_setting_s = d;
    }
    if flags.out.is_some() {
        recipe.out_dir = flags.out.clone();
    }
    recipe.dump_tags |= flags.dump_tags;
    recipe.allow_policy_mismatch |= flags.allow_policy_mismatch;
    Ok(recipe)
}

fn build_lock_spec(flags: &LockFlags) -> Result<LockRunSpec> {
    let drift = match flags.drift.as_str() {
        "random-walk" => DriftModel {
            time_constant_s: flags.drift_period_s,
            ..DriftModel::random_walk(flags.drift_mag)
        },
        "sinusoidal" => DriftModel::sinusoidal(flags.drift_mag, flags.drift_period_s),
        "none" => DriftModel::none(),
        other => return Err(Error::Config(format!("unknown drift process '{other}'"))),
    };
    let mut config = LockConfig::default();
    let defaults = PidGains::default();
    config.gains = PidGains {
        kp: flags.kp.unwrap_or(defaults.kp),
        ki: flags.ki.unwrap_or(defaults.ki),
        kd: flags.kd.unwrap_or(defaults.kd),
    };
    if let Some(phi) = flags.initial_phi_rad {
        config.initial_phi_s_rad = phi;
    }
    if let Some(seed) = flags.seed {
        config.rng_seed = seed;
    }
    Ok(LockRunSpec {
        drift,
        config,
        duration_s: flags.duration_s,
        out_dir: flags.out.clone(),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bell(flags) => {
            let art = run_bell(&build_recipe(&flags)?)?;
            print!("{}", art.summary);
            println!("results in {}", art.out_dir.display());
        }
        Command::Scan {
            recipe,
            party,
            start_rad,
            stop_rad,
            steps,
        } => {
            let art = run_scan(&build_recipe(&recipe)?, party, start_rad, stop_rad, steps)?;
            print!("{}", art.summary);
            println!("results in {}", art.out_dir.display());
        }
        Command::Lock(flags) => {
            let art = run_lock(&build_lock_spec(&flags)?)?;
            print!("{}", art.summary);
            println!("results in {}", art.out_dir.display());
        }
        Command::Lhv(LhvCommand::Attack {
            seed,
            duration_s,
            window_ns,
            wide_window_ns,
            out,
            dump_tags,
        }) => {
            let mut spec = AttackSpec::default();
            if let Some(s) = seed {
                spec.sim.rng_seed = s;
            }
            if let Some(d) = duration_s {
                spec.duration_per_setting_s = d;
            }
            if let Some(w) = window_ns {
                spec.narrow_window_s = w * 1e-9;
            }
            if let Some(w) = wide_window_ns {
                spec.wide_window_s = w * 1e-9;
            }
            spec.out_dir = out;
            spec.dump_tags = dump_tags;
            let art = run_lhv_attack(&spec)?;
            print!("{}", art.summary);
            println!("results in {}", art.out_dir.display());
        }
        Command::Lhv(LhvCommand::Optimize {
            seed,
            n_lambda,
            restarts,
            sweeps,
            objective,
            visibility,
            out,
        }) => {
            let objective = match objective.as_str() {
                "max-post-s" => Objective::MaximizePostselectedS,
                "fit-quantum" => Objective::FitQuantumStatistics { visibility },
                other => {
                    return Err(Error::Config(format!("unknown objective '{other}'")));
                }
            };
            let spec = OptimizeSpec {
                n_lambda,
                grid: SettingsGrid::default(),
                objective,
                restarts,
                sweeps,
                seed,
            };
            let art = run_lhv_optimize(&spec, out.as_deref())?;
            print!("{}", art.summary);
            println!("results in {}", art.out_dir.display());
        }
        Command::Histogram(flags) => {
            let art = run_histogram(&build_recipe(&flags)?)?;
            print!("{}", art.summary);
            println!("results in {}", art.out_dir.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
