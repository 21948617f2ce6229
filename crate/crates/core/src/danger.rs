//! Danger function and the binary road-crossing decision.
//!
//! ```text
//! g(d, v, a) = (h(v) + k·f(a)) / ln(d + ε)
//! ```
//!
//! `h` ramps closing speed onto `[0, 1]`, `f` maps closing acceleration onto
//! `[-1, 1]` with a dead zone around zero. The denominator vanishes at
//! `d = 1 − ε` and turns negative below it, so distances under `d_sat` are
//! saturated to `g_max` and every other value is clamped to `±g_max`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::KinematicState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DangerParams {
    /// Weight of the acceleration term.
    pub k: f64,
    pub epsilon: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    pub a_lo: f64,
    pub a_hi: f64,
    pub g_threshold: f64,
    pub d_sat: f64,
    pub g_max: f64,
}

impl Default for DangerParams {
    fn default() -> Self {
        DangerParams {
            k: 0.1,
            epsilon: 0.6,
            v_lo: 0.05,
            v_hi: 0.65,
            a_lo: 1.0,
            a_hi: 10.0,
            g_threshold: 1.0,
            d_sat: 0.5,
            g_max: 10.0,
        }
    }
}

impl DangerParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(format!("danger params: {msg}")));
        if !(self.v_lo < self.v_hi) {
            return fail("v_lo must be below v_hi");
        }
        if !(self.a_lo < self.a_hi) {
            return fail("a_lo must be below a_hi");
        }
        if !(self.a_lo >= 0.0) {
            return fail("a_lo must be non-negative");
        }
        if !(self.epsilon > 0.0) {
            return fail("epsilon must be positive");
        }
        if !(self.d_sat + self.epsilon > 1.0) {
            return fail("d_sat + epsilon must exceed 1 so the log denominator stays positive");
        }
        if !(self.g_max > self.g_threshold) {
            return fail("g_max must exceed g_threshold");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Dangerous,
    Safe,
}

impl Decision {
    pub fn is_dangerous(self) -> bool {
        self == Decision::Dangerous
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Dangerous => "dangerous",
            Decision::Safe => "safe",
        })
    }
}

/// Thresholded linear ramp of the closing speed, in `[0, 1]`.
pub fn speed_component(closing_speed: f64, p: &DangerParams) -> f64 {
    if closing_speed <= p.v_lo {
        0.0
    } else if closing_speed <= p.v_hi {
        (closing_speed - p.v_lo) / (p.v_hi - p.v_lo)
    } else {
        1.0
    }
}

/// Five-branch ramp of the closing acceleration, in `[-1, 1]`.
pub fn accel_component(closing_accel: f64, p: &DangerParams) -> f64 {
    let span = p.a_hi - p.a_lo;
    if closing_accel <= -p.a_hi {
        -1.0
    } else if closing_accel <= -p.a_lo {
        (closing_accel + p.a_lo) / span
    } else if closing_accel <= p.a_lo {
        0.0
    } else if closing_accel <= p.a_hi {
        (closing_accel - p.a_lo) / span
    } else {
        1.0
    }
}

pub fn danger_value(s: &KinematicState, p: &DangerParams) -> f64 {
    if s.distance < p.d_sat {
        return p.g_max;
    }
    let numerator = speed_component(s.closing_speed, p) + p.k * accel_component(s.closing_accel, p);
    (numerator / (s.distance + p.epsilon).ln()).clamp(-p.g_max, p.g_max)
}

/// Dangerous iff `g` strictly exceeds the threshold.
pub fn decide(g: f64, p: &DangerParams) -> Decision {
    if g > p.g_threshold {
        Decision::Dangerous
    } else {
        Decision::Safe
    }
}

pub fn danger_series(states: &[KinematicState], p: &DangerParams) -> Vec<f64> {
    states.iter().map(|s| danger_value(s, p)).collect()
}

pub fn decide_series(values: &[f64], p: &DangerParams) -> Vec<Decision> {
    values.iter().map(|&g| decide(g, p)).collect()
}
