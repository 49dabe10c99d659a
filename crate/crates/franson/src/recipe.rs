//! Experiment recipes: one JSON-serializable description of a full run,
//! with presets for the three measurement schemes and schema validation
//! that reports the offending field path.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::analysis::{CoincidenceMode, CoincidencePolicy};
use crate::error::{Error, Result};
use crate::eventsim::SimConfig;
use crate::optics::OpticalLayout;
use crate::quantum::{Scheme, CHSH_ANGLES};

/// The three measurement configurations, as usually numbered: I passive
/// with postselection, II passive without, III active switching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeId {
    I,
    II,
    III,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::I, SchemeId::II, SchemeId::III];

    pub fn scheme(self) -> Scheme {
        match self {
            SchemeId::I => Scheme::PassivePostselected,
            SchemeId::II => Scheme::PassiveFull,
            SchemeId::III => Scheme::ActiveSwitch,
        }
    }

    pub fn parse(s: &str) -> Result<SchemeId> {
        match s.trim().to_uppercase().as_str() {
            "I" | "1" => Ok(SchemeId::I),
            "II" | "2" => Ok(SchemeId::II),
            "III" | "3" => Ok(SchemeId::III),
            other => Err(Error::BadInput(format!(
                "scheme: expected I, II, or III, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeId::I => "I",
            SchemeId::II => "II",
            SchemeId::III => "III",
        };
        f.pad(s)
    }
}

/// The four analyzer phases of a CHSH run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Default for ChshAngles {
    fn default() -> Self {
        let [a, a_prime, b, b_prime] = CHSH_ANGLES;
        ChshAngles {
            a,
            a_prime,
            b,
            b_prime,
        }
    }
}

impl ChshAngles {
    /// Setting pairs in schedule order (a b, a' b, a b', a' b').
    pub fn setting_pairs(&self) -> [(f64, f64); 4] {
        [
            (self.a, self.b),
            (self.a_prime, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b_prime),
        ]
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecipe {
    pub scheme: SchemeId,
    pub layout: OpticalLayout,
    pub sim: SimConfig,
    pub policy: CoincidencePolicy,
    #[serde(default)]
    pub angles: ChshAngles,
    /// Acquisition time per CHSH setting.
    pub duration_per_setting_s: f64,
    /// Where run artifacts land; None means current directory ./run.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Also write the raw tag streams.
    #[serde(default)]
    pub dump_tags: bool,
    /// Permit a coincidence policy that does not match the scheme's usual
    /// analysis (for loophole demonstrations).
    #[serde(default)]
    pub allow_policy_mismatch: bool,
    /// Emit per-party histogram CSVs alongside the result.
    #[serde(default = "default_true")]
    pub write_histograms: bool,
}

impl ExperimentRecipe {
    /// Standard configuration for a scheme: the usual window and the
    /// visibility each scheme is typically quoted at.
    pub fn preset(scheme: SchemeId) -> ExperimentRecipe {
        let (layout, policy) = match scheme {
            SchemeId::I => (
                OpticalLayout::new(Scheme::PassivePostselected, 0.95),
                CoincidencePolicy::central_only(2.4e-9),
            ),
            SchemeId::II => (
                OpticalLayout::new(Scheme::PassiveFull, 0.95),
                CoincidencePolicy::all_slots(8.1e-9),
            ),
            SchemeId::III => (
                OpticalLayout::new(Scheme::ActiveSwitch, 0.89),
                CoincidencePolicy::all_slots(8.1e-9),
            ),
        };
        ExperimentRecipe {
            scheme,
            layout,
            sim: SimConfig::default(),
            policy,
            angles: ChshAngles::default(),
            duration_per_setting_s: 0.25,
            out_dir: None,
            dump_tags: false,
            allow_policy_mismatch: false,
            write_histograms: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.layout.scheme != self.scheme.scheme() {
            return Err(Error::Config(format!(
                "recipe.layout.scheme: {:?} does not belong to scheme {}",
                self.layout.scheme, self.scheme
            )));
        }
        if !(0.0..=1.0).contains(&self.layout.visibility) || self.layout.visibility.is_nan() {
            return Err(Error::Config(
                "recipe.layout.visibility: must lie in [0, 1]".into(),
            ));
        }
        if !(self.layout.delta_t_s > 0.0) {
            return Err(Error::Config(
                "recipe.layout.delta_t_s: must be positive".into(),
            ));
        }
        if !(self.duration_per_setting_s > 0.0) {
            return Err(Error::Config(
                "recipe.duration_per_setting_s: must be positive".into(),
            ));
        }
        for (name, v) in [
            ("a", self.angles.a),
            ("a_prime", self.angles.a_prime),
            ("b", self.angles.b),
            ("b_prime", self.angles.b_prime),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!(
                    "recipe.angles.{name}: must be finite"
                )));
            }
        }
        if !self.allow_policy_mismatch {
            let expected = match self.scheme {
                SchemeId::I => CoincidenceMode::CentralOnly,
                SchemeId::II | SchemeId::III => CoincidenceMode::AllSlots,
            };
            if self.policy.mode != expected {
                return Err(Error::Config(format!(
                    "recipe.policy.mode: scheme {} normally uses {:?}; set allow_policy_mismatch to override",
                    self.scheme, expected
                )));
            }
            let jitter_allowance = 4.0 * self.sim.jitter_sigma_s;
            self.policy.validate(self.layout.delta_t_s, jitter_allowance)?;
        } else if !(self.policy.window_s > 0.0) {
            return Err(Error::Config("recipe.policy.window_s: must be positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<ExperimentRecipe> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: &Path) -> Result<ExperimentRecipe> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_carry_scheme_defaults() {
        for id in SchemeId::ALL {
            let r = ExperimentRecipe::preset(id);
            r.validate().unwrap();
            assert_eq!(r.layout.scheme, id.scheme());
        }
        let one = ExperimentRecipe::preset(SchemeId::I);
        assert_eq!(one.policy.mode, CoincidenceMode::CentralOnly);
        assert!((one.policy.window_s - 2.4e-9).abs() < 1e-18);
        assert!((one.layout.visibility - 0.95).abs() < 1e-15);
        let three = ExperimentRecipe::preset(SchemeId::III);
        assert_eq!(three.policy.mode, CoincidenceMode::AllSlots);
        assert!((three.policy.window_s - 8.1e-9).abs() < 1e-18);
        assert!((three.layout.visibility - 0.89).abs() < 1e-15);
    }

    #[test]
    fn round_trip_preserves_everything() {
        let mut r = ExperimentRecipe::preset(SchemeId::III);
        r.sim.rng_seed = 99;
        r.angles.b_prime = 1.234;
        r.out_dir = Some(PathBuf::from("/tmp/run7"));
        r.dump_tags = true;
        let back = ExperimentRecipe::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn scheme_parse_accepts_roman_and_arabic() {
        assert_eq!(SchemeId::parse("I").unwrap(), SchemeId::I);
        assert_eq!(SchemeId::parse("ii").unwrap(), SchemeId::II);
        assert_eq!(SchemeId::parse("3").unwrap(), SchemeId::III);
        assert!(SchemeId::parse("IV").is_err());
        assert_eq!(SchemeId::I.to_string(), "I");
    }

    #[test]
    fn policy_mismatch_needs_the_override() {
        let mut r = ExperimentRecipe::preset(SchemeId::I);
        r.policy = CoincidencePolicy::all_slots(8.1e-9);
        assert!(r.validate().is_err());
        r.allow_policy_mismatch = true;
        r.validate().unwrap();

        // narrow window on a wide-mode scheme likewise needs the flag
        let mut r = ExperimentRecipe::preset(SchemeId::II);
        r.policy = CoincidencePolicy::all_slots(2.4e-9);
        assert!(r.validate().is_err());
        r.allow_policy_mismatch = true;
        r.validate().unwrap();
    }

    #[test]
    fn validation_reports_field_paths() {
        let mut r = ExperimentRecipe::preset(SchemeId::II);
        r.duration_per_setting_s = 0.0;
        let msg = r.validate().unwrap_err().to_string();
        assert!(msg.contains("duration_per_setting_s"), "{msg}");

        let mut r = ExperimentRecipe::preset(SchemeId::II);
        r.layout.visibility = 1.4;
        let msg = r.validate().unwrap_err().to_string();
        assert!(msg.contains("visibility"), "{msg}");

        let mut r = ExperimentRecipe::preset(SchemeId::II);
        r.layout.scheme = Scheme::ActiveSwitch;
        assert!(r.validate().is_err());
    }
}
