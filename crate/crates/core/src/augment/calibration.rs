//! Detection probabilities per (camera, detector, scenario, condition),
//! taken from measured mean frame recognition rates.

use serde::{Deserialize, Serialize};

use super::{Condition, Level, RainIntensity};
use crate::error::{Error, Result};
use crate::kinematics::ScenarioId;
use crate::perception::{Camera, DetectorModel};

pub const DEFAULT_NOISE_SIGMA: f64 = 0.1;

/// Detection probability for fog 0.7 and torrential rain, whose measured
/// rates were near zero and never tabulated.
pub const UNCALIBRATED_DETECT_PROB: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationProfile {
    pub detect_prob: f64,
    /// Standard deviation of the distance error, metres.
    pub noise_sigma: f64,
}

// Column order follows `Condition::calibrated()`:
// original, fog 0.3, fog 0.5, drizzle, heavy rain, bright 0.5, dark 0.5.
#[allow(clippy::approx_constant)]
const RATES: [(ScenarioId, Camera, DetectorModel, [f64; 7]); 8] = [
    (ScenarioId::A, Camera::Drone, DetectorModel::Y5,
        [0.2052, 0.2111, 0.0761, 0.2733, 0.0082, 0.1810, 0.1728]),
    (ScenarioId::A, Camera::Drone, DetectorModel::Y8,
        [0.7341, 0.5230, 0.2816, 0.7311, 0.6900, 0.7532, 0.7610]),
    (ScenarioId::A, Camera::Aw, DetectorModel::Y5,
        [0.3596, 0.3153, 0.0644, 0.2582, 0.0020, 0.3173, 0.3661]),
    (ScenarioId::A, Camera::Aw, DetectorModel::Y8,
        [0.4163, 0.0812, 0.0613, 0.2930, 0.2483, 0.4656, 0.5231]),
    (ScenarioId::B, Camera::Drone, DetectorModel::Y5,
        [0.3803, 0.3559, 0.1112, 0.3827, 0.0016, 0.4223, 0.4342]),
    (ScenarioId::B, Camera::Drone, DetectorModel::Y8,
        [0.4739, 0.5202, 0.1909, 0.4053, 0.2616, 0.8142, 0.8117]),
    (ScenarioId::B, Camera::Aw, DetectorModel::Y5,
        [0.3186, 0.2710, 0.1853, 0.1553, 0.0020, 0.2741, 0.2666]),
    (ScenarioId::B, Camera::Aw, DetectorModel::Y8,
        [0.2551, 0.1244, 0.0459, 0.1502, 0.1416, 0.5831, 0.6470]),
];

fn column(condition: Condition) -> Option<usize> {
    Condition::calibrated().iter().position(|&c| c == condition)
}

fn is_uncalibrated_extreme(condition: Condition) -> bool {
    matches!(
        condition,
        Condition::Fog(Level::L07) | Condition::Rain(RainIntensity::Torrential)
    )
}

fn key(camera: Camera, model: DetectorModel, scenario: ScenarioId, condition: Condition) -> String {
    format!("({}, {}, {scenario}, {condition})", camera.as_str(), model.as_str())
}

/// Built-in profile for a tuple, with the default distance noise.
pub fn degradation_profile(
    camera: Camera,
    model: DetectorModel,
    scenario: ScenarioId,
    condition: Condition,
) -> Result<DegradationProfile> {
    let detect_prob = if is_uncalibrated_extreme(condition) {
        Some(UNCALIBRATED_DETECT_PROB)
    } else {
        column(condition).and_then(|col| {
            RATES
                .iter()
                .find(|(s, c, m, _)| (*s, *c, *m) == (scenario, camera, model))
                .map(|row| row.3[col])
        })
    };
    detect_prob
        .map(|detect_prob| DegradationProfile {
            detect_prob,
            noise_sigma: DEFAULT_NOISE_SIGMA,
        })
        .ok_or_else(|| {
            let valid: Vec<String> = Condition::calibrated()
                .iter()
                .chain(&[Condition::Fog(Level::L07), Condition::Rain(RainIntensity::Torrential)])
                .map(ToString::to_string)
                .collect();
            Error::UnknownProfile {
                key: key(camera, model, scenario, condition),
                valid: format!(
                    "cameras drone|aw × models Y5|Y8 × scenarios A|B × conditions {}",
                    valid.join(", ")
                ),
            }
        })
}

/// Replacement values for one tuple. Unset fields keep the built-in value;
/// an override with `detect_prob` also makes an uncalibrated tuple usable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileOverride {
    pub camera: Camera,
    pub model: DetectorModel,
    pub scenario: ScenarioId,
    pub condition: Condition,
    #[serde(default)]
    pub detect_prob: Option<f64>,
    #[serde(default)]
    pub noise_sigma: Option<f64>,
}

/// Built-in calibration plus user overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationTable {
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub overrides: Vec<ProfileOverride>,
}

fn default_sigma() -> f64 {
    DEFAULT_NOISE_SIGMA
}

impl Default for DegradationTable {
    fn default() -> Self {
        DegradationTable {
            noise_sigma: DEFAULT_NOISE_SIGMA,
            overrides: Vec::new(),
        }
    }
}

impl DegradationTable {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Config("degradation: noise_sigma must be non-negative".into()));
        }
        for o in &self.overrides {
            let k = key(o.camera, o.model, o.scenario, o.condition);
            if o.detect_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Config(format!("override {k}: detect_prob outside [0, 1]")));
            }
            if o.noise_sigma.is_some_and(|s| !(s >= 0.0)) {
                return Err(Error::Config(format!("override {k}: negative noise_sigma")));
            }
        }
        Ok(())
    }

    pub fn lookup(
        &self,
        camera: Camera,
        model: DetectorModel,
        scenario: ScenarioId,
        condition: Condition,
    ) -> Result<DegradationProfile> {
        let over = self.overrides.iter().rev().find(|o| {
            (o.camera, o.model, o.scenario, o.condition) == (camera, model, scenario, condition)
        });
        let builtin = degradation_profile(camera, model, scenario, condition);
        let detect_prob = match (over.and_then(|o| o.detect_prob), builtin.as_ref()) {
            (Some(p), _) => p,
            (None, Ok(b)) => b.detect_prob,
            (None, Err(_)) => return builtin,
        };
        Ok(DegradationProfile {
            detect_prob,
            noise_sigma: over.and_then(|o| o.noise_sigma).unwrap_or(self.noise_sigma),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_examples() {
        let p = |c, m, s, cond| degradation_profile(c, m, s, cond).unwrap().detect_prob;
        assert_eq!(p(Camera::Drone, DetectorModel::Y8, ScenarioId::A, Condition::Original), 0.7341);
        assert_eq!(
            p(Camera::Aw, DetectorModel::Y5, ScenarioId::A, Condition::Rain(RainIntensity::Heavy)),
            0.0020
        );
        assert_eq!(
            p(Camera::Drone, DetectorModel::Y8, ScenarioId::B, Condition::Dark(Level::L05)),
            0.8117
        );
    }

    #[test]
    fn extremes_default_to_near_zero() {
        for cond in [Condition::Fog(Level::L07), Condition::Rain(RainIntensity::Torrential)] {
            let prof = degradation_profile(Camera::Aw, DetectorModel::Y8, ScenarioId::B, cond).unwrap();
            assert_eq!(prof.detect_prob, UNCALIBRATED_DETECT_PROB);
        }
    }

    #[test]
    fn unknown_tuple_lists_valid_keys() {
        let err = degradation_profile(
            Camera::Drone,
            DetectorModel::Y5,
            ScenarioId::A,
            Condition::Bright(Level::L09),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bright_0.9"), "{msg}");
        assert!(msg.contains("dark_0.5"), "{msg}");
    }

    #[test]
    fn overrides_take_precedence() {
        let table = DegradationTable {
            noise_sigma: 0.05,
            overrides: vec![ProfileOverride {
                camera: Camera::Drone,
                model: DetectorModel::Y5,
                scenario: ScenarioId::A,
                condition: Condition::Bright(Level::L09),
                detect_prob: Some(0.2),
                noise_sigma: Some(0.3),
            }],
        };
        let o = table
            .lookup(Camera::Drone, DetectorModel::Y5, ScenarioId::A, Condition::Bright(Level::L09))
            .unwrap();
        assert_eq!(o, DegradationProfile { detect_prob: 0.2, noise_sigma: 0.3 });
        let b = table
            .lookup(Camera::Aw, DetectorModel::Y5, ScenarioId::A, Condition::Original)
            .unwrap();
        assert_eq!(b, DegradationProfile { detect_prob: 0.3596, noise_sigma: 0.05 });
    }
}
