use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{Condition, DegradationTable};
use crate::danger::DangerParams;
use crate::error::{Error, Result};
use crate::fusion::FusionMethod;
use crate::kinematics::{ScenarioConfig, DEFAULT_SMOOTHING_WINDOW};
use crate::perception::{CameraModel, Channel, ImputationPolicy};

pub const DEFAULT_MASTER_SEED: u64 = 20240601;
pub const DEFAULT_SEQUENCES: usize = 6;

/// Everything a run depends on. Every field has a default, so `{}` is a
/// complete configuration for the standard two-scenario benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenarios: Vec<ScenarioConfig>,
    pub conditions: Vec<Condition>,
    pub channels: Vec<Channel>,
    pub fusion_methods: Vec<FusionMethod>,
    pub imputation_policy: ImputationPolicy,
    pub danger_params: DangerParams,
    pub camera: CameraModel,
    pub degradation: DegradationTable,
    pub smoothing_window: usize,
    pub sequences_per_scenario: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenarios: vec![ScenarioConfig::default_a(), ScenarioConfig::default_b()],
            conditions: Condition::calibrated(),
            channels: Channel::all(),
            fusion_methods: FusionMethod::ALL.to_vec(),
            imputation_policy: ImputationPolicy::ReferenceMax,
            danger_params: DangerParams::default(),
            camera: CameraModel::default(),
            degradation: DegradationTable::default(),
            smoothing_window: DEFAULT_SMOOTHING_WINDOW,
            sequences_per_scenario: DEFAULT_SEQUENCES,
            master_seed: DEFAULT_MASTER_SEED,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON; errors name the offending field path.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            Error::Config(format!("{}: at `{field}`: {}", origin.display(), e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config("at least one scenario is required".into()));
        }
        if self.conditions.is_empty() {
            return Err(Error::Config("at least one condition is required".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::Config("at least one channel is required".into()));
        }
        if self.sequences_per_scenario == 0 {
            return Err(Error::Config("sequences_per_scenario must be at least 1".into()));
        }
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "smoothing_window must be odd and at least 1, got {}",
                self.smoothing_window
            )));
        }
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            if !seen.insert(s.scenario) {
                return Err(Error::Config(format!("scenario {} listed twice", s.scenario)));
            }
            s.validate()?;
        }
        let mut seen = HashSet::new();
        for c in &self.channels {
            if !seen.insert(*c) {
                return Err(Error::Config(format!("channel {c} listed twice")));
            }
        }
        let mut seen = HashSet::new();
        for c in &self.conditions {
            if !seen.insert(*c) {
                return Err(Error::Config(format!("condition {c} listed twice")));
            }
        }
        self.danger_params.validate()?;
        self.camera.validate()?;
        self.degradation.validate()
    }

    /// Checks that every simulated channel has a degradation profile.
    pub fn check_profiles(&self) -> Result<()> {
        for s in &self.scenarios {
            for &cond in &self.conditions {
                for ch in &self.channels {
                    self.degradation
                        .lookup(ch.camera, ch.model, s.scenario, cond)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::ScenarioId;

    #[test]
    fn empty_object_is_the_default_benchmark() {
        let cfg = ExperimentConfig::from_json("{}", Path::new("c.json")).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.conditions.len(), 7);
        assert_eq!(cfg.sequences_per_scenario, 6);
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_json(), Path::new("c.json")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_condition_names_the_key() {
        let err = ExperimentConfig::from_json(
            r#"{"conditions": ["original", "snow"]}"#,
            Path::new("c.json"),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("snow") && msg.contains("conditions[1]"), "{msg}");
        assert!(err.is_validation());
    }

    #[test]
    fn misspelled_field_is_rejected() {
        let err = ExperimentConfig::from_json(r#"{"sequences": 3}"#, Path::new("c.json"))
            .unwrap_err();
        assert!(err.to_string().contains("sequences"), "{err}");
    }

    #[test]
    fn structural_checks() {
        let cfg = ExperimentConfig {
            sequences_per_scenario: 0,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.channels.push(cfg.channels[0]);
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.scenarios[1].scenario = ScenarioId::A;
        assert!(cfg.validate().is_err());

        let cfg = ExperimentConfig {
            smoothing_window: 4,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn uncalibrated_condition_needs_override() {
        let cfg = ExperimentConfig {
            conditions: vec!["bright_0.9".parse().unwrap()],
            ..ExperimentConfig::default()
        };
        assert!(matches!(cfg.check_profiles(), Err(Error::UnknownProfile { .. })));
    }
}
