//! Ground-truth trajectories and the kinematic series derived from them.
//!
//! Positions live in a road-aligned plane: the vehicle drives along a straight
//! line and the wheelchair crosses at constant speed. Distance, closing speed
//! and closing acceleration are recovered from sampled positions with finite
//! differences so that the same code path serves simulated, ingested and
//! fused distance series.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::frame_rng;

pub const DEFAULT_FRAME_RATE: f64 = 30.0;
pub const DEFAULT_SMOOTHING_WINDOW: usize = 5;

/// Header of the ground-truth CSV format.
pub const GROUND_TRUTH_HEADER: &str = "frame,t_s,veh_x_m,veh_y_m,aw_x_m,aw_y_m";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    A,
    B,
}

impl ScenarioId {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::A => "A",
            ScenarioId::B => "B",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(ScenarioId::A),
            "B" => Ok(ScenarioId::B),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

/// One constant-acceleration leg of the vehicle's motion plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionSegment {
    pub duration_s: f64,
    pub accel_mps2: f64,
}

/// Straight-line vehicle motion with piecewise-constant acceleration.
///
/// After the last segment the vehicle keeps its final speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleProfile {
    pub start_m: [f64; 2],
    /// Direction of travel; normalized on use.
    pub heading: [f64; 2],
    pub initial_speed_mps: f64,
    pub segments: Vec<MotionSegment>,
}

impl VehicleProfile {
    /// Distance travelled along the heading after `t` seconds.
    pub fn travelled(&self, t: f64) -> f64 {
        let mut elapsed = 0.0;
        let mut offset = 0.0;
        let mut speed = self.initial_speed_mps;
        for seg in &self.segments {
            let span = seg.duration_s.min(t - elapsed);
            if span <= 0.0 {
                return offset;
            }
            offset += speed * span + 0.5 * seg.accel_mps2 * span * span;
            if span < seg.duration_s {
                return offset;
            }
            speed += seg.accel_mps2 * seg.duration_s;
            elapsed += seg.duration_s;
        }
        offset + speed * (t - elapsed).max(0.0)
    }

    pub fn position(&self, t: f64) -> [f64; 2] {
        let [hx, hy] = self.heading;
        let norm = hx.hypot(hy);
        let s = self.travelled(t);
        [self.start_m[0] + s * hx / norm, self.start_m[1] + s * hy / norm]
    }
}

/// Constant-speed crossing path; the wheelchair stops once it reaches `end_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelchairPath {
    pub start_m: [f64; 2],
    pub end_m: [f64; 2],
    pub speed_mps: f64,
}

impl WheelchairPath {
    pub fn position(&self, t: f64) -> [f64; 2] {
        let dx = self.end_m[0] - self.start_m[0];
        let dy = self.end_m[1] - self.start_m[1];
        let length = dx.hypot(dy);
        if length == 0.0 || self.speed_mps == 0.0 {
            return self.start_m;
        }
        let frac = (self.speed_mps * t / length).clamp(0.0, 1.0);
        [self.start_m[0] + frac * dx, self.start_m[1] + frac * dy]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub duration_s: f64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    pub vehicle: VehicleProfile,
    pub wheelchair: WheelchairPath,
    #[serde(default)]
    pub rng_seed: u64,
    /// Standard deviation of zero-mean positional noise added to every
    /// coordinate, emulating tracker noise. Zero disables jitter.
    #[serde(default)]
    pub jitter_sigma_m: f64,
}

fn default_frame_rate() -> f64 {
    DEFAULT_FRAME_RATE
}

impl ScenarioConfig {
    /// Six-second run: the vehicle approaches from 3 m at a steady 0.5 m/s
    /// while the wheelchair edges toward the crossing.
    pub fn default_a() -> Self {
        ScenarioConfig {
            scenario: ScenarioId::A,
            duration_s: 6.0,
            frame_rate: DEFAULT_FRAME_RATE,
            vehicle: VehicleProfile {
                start_m: [3.0, 0.0],
                heading: [-1.0, 0.0],
                initial_speed_mps: 0.5,
                segments: vec![MotionSegment {
                    duration_s: 6.0,
                    accel_mps2: 0.0,
                }],
            },
            wheelchair: WheelchairPath {
                start_m: [0.0, -1.0],
                end_m: [0.0, 1.0],
                speed_mps: 0.1,
            },
            rng_seed: 0,
            jitter_sigma_m: 0.0,
        }
    }

    /// Nine-second run from 4 m with an accelerate-then-brake profile.
    pub fn default_b() -> Self {
        ScenarioConfig {
            scenario: ScenarioId::B,
            duration_s: 9.0,
            frame_rate: DEFAULT_FRAME_RATE,
            vehicle: VehicleProfile {
                start_m: [4.0, 0.0],
                heading: [-1.0, 0.0],
                initial_speed_mps: 0.2,
                segments: vec![
                    MotionSegment {
                        duration_s: 4.0,
                        accel_mps2: 0.12,
                    },
                    MotionSegment {
                        duration_s: 5.0,
                        accel_mps2: -0.1,
                    },
                ],
            },
            wheelchair: WheelchairPath {
                start_m: [0.0, -0.8],
                end_m: [0.0, 1.0],
                speed_mps: 0.05,
            },
            rng_seed: 0,
            jitter_sigma_m: 0.0,
        }
    }

    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.frame_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Config(format!(
                "scenario {}: duration_s must be positive, got {}",
                self.scenario, self.duration_s
            )));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(Error::Config(format!(
                "scenario {}: frame_rate must be positive, got {}",
                self.scenario, self.frame_rate
            )));
        }
        let [hx, hy] = self.vehicle.heading;
        if hx.hypot(hy) == 0.0 {
            return Err(Error::Config(format!(
                "scenario {}: vehicle heading must be non-zero",
                self.scenario
            )));
        }
        let gap = distance(self.vehicle.start_m, self.wheelchair.start_m);
        if gap <= 0.0 {
            return Err(Error::Config(format!(
                "scenario {}: initial vehicle distance must be positive",
                self.scenario
            )));
        }
        if self.jitter_sigma_m < 0.0 || self.wheelchair.speed_mps < 0.0 {
            return Err(Error::Config(format!(
                "scenario {}: jitter and wheelchair speed must be non-negative",
                self.scenario
            )));
        }
        if self.frame_count() == 0 {
            return Err(Error::Config(format!(
                "scenario {}: duration × frame_rate rounds to zero frames",
                self.scenario
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub index: usize,
    pub time_s: f64,
    pub vehicle_m: [f64; 2],
    pub wheelchair_m: [f64; 2],
}

impl GroundTruthFrame {
    pub fn distance(&self) -> f64 {
        distance(self.vehicle_m, self.wheelchair_m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSequence {
    pub frame_rate: f64,
    pub frames: Vec<GroundTruthFrame>,
}

impl GroundTruthSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.frames.iter().map(GroundTruthFrame::distance).collect()
    }
}

/// Per-frame relative kinematics between vehicle and wheelchair.
///
/// `closing_speed` is positive while the gap shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub distance: f64,
    pub closing_speed: f64,
    pub closing_accel: f64,
}

pub fn simulate_scenario(config: &ScenarioConfig) -> Result<GroundTruthSequence> {
    config.validate()?;
    let n = config.frame_count();
    let jitter = if config.jitter_sigma_m > 0.0 {
        Some(Normal::new(0.0, config.jitter_sigma_m).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };

    let frames = (0..n)
        .map(|index| {
            let time_s = index as f64 / config.frame_rate;
            let mut vehicle_m = config.vehicle.position(time_s);
            let mut wheelchair_m = config.wheelchair.position(time_s);
            if let Some(noise) = &jitter {
                let mut rng = frame_rng(config.rng_seed, index as u64);
                for c in vehicle_m.iter_mut().chain(wheelchair_m.iter_mut()) {
                    *c += noise.sample(&mut rng);
                }
            }
            GroundTruthFrame {
                index,
                time_s,
                vehicle_m,
                wheelchair_m,
            }
        })
        .collect();

    Ok(GroundTruthSequence {
        frame_rate: config.frame_rate,
        frames,
    })
}

pub fn derive_kinematics(
    seq: &GroundTruthSequence,
    smoothing_window: usize,
) -> Result<Vec<KinematicState>> {
    kinematics_from_distances(&seq.distances(), seq.frame_rate, smoothing_window)
}

/// Finite-difference kinematics of a sampled distance series.
///
/// Closing speed is the negated time derivative of distance and closing
/// acceleration the derivative of the smoothed closing speed. Interior frames
/// use central differences, endpoints second-order one-sided differences, so
/// the estimates are exact for distance polynomials of degree two or less
/// when `smoothing_window` is 1.
pub fn kinematics_from_distances(
    distances: &[f64],
    frame_rate: f64,
    smoothing_window: usize,
) -> Result<Vec<KinematicState>> {
    if distances.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 frames for finite differences, got {}",
            distances.len()
        )));
    }
    if smoothing_window == 0 || smoothing_window.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "smoothing window must be odd and at least 1, got {smoothing_window}"
        )));
    }
    if !(frame_rate > 0.0) {
        return Err(Error::Parameter(format!(
            "frame rate must be positive, got {frame_rate}"
        )));
    }

    let dt = 1.0 / frame_rate;
    let rate: Vec<f64> = derivative(distances, dt).into_iter().map(|v| -v).collect();
    let closing_speed = moving_average(&rate, smoothing_window);
    let closing_accel = moving_average(&derivative(&closing_speed, dt), smoothing_window);

    Ok(distances
        .iter()
        .zip(closing_speed)
        .zip(closing_accel)
        .map(|((&distance, closing_speed), closing_accel)| KinematicState {
            distance,
            closing_speed,
            closing_accel,
        })
        .collect())
}

/// Requires `xs.len() >= 3`.
fn derivative(xs: &[f64], dt: f64) -> Vec<f64> {
    let n = xs.len();
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * xs[0] + 4.0 * xs[1] - xs[2]) / (2.0 * dt));
    for i in 1..n - 1 {
        out.push((xs[i + 1] - xs[i - 1]) / (2.0 * dt));
    }
    out.push((3.0 * xs[n - 1] - 4.0 * xs[n - 2] + xs[n - 3]) / (2.0 * dt));
    out
}

/// Centered moving average; near the ends the window shrinks symmetrically
/// so linear trends pass through unchanged.
fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = xs.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &xs[i - h..=i + h];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn write_ground_truth<W: Write>(seq: &GroundTruthSequence, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(GROUND_TRUTH_HEADER.split(','))?;
    for f in &seq.frames {
        w.write_record([
            f.index.to_string(),
            f.time_s.to_string(),
            f.vehicle_m[0].to_string(),
            f.vehicle_m[1].to_string(),
            f.wheelchair_m[0].to_string(),
            f.wheelchair_m[1].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_ground_truth(seq: &GroundTruthSequence, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_ground_truth(seq, std::io::BufWriter::new(file))
}

/// Reads a ground-truth CSV. The frame rate is recovered from the timestamps
/// of the first two frames.
pub fn read_ground_truth<R: Read>(reader: R, origin: &Path) -> Result<GroundTruthSequence> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != GROUND_TRUTH_HEADER {
        return Err(parse_err(
            1,
            format!("expected header `{GROUND_TRUTH_HEADER}`, got `{header}`"),
        ));
    }

    let mut frames = Vec::new();
    for (row, record) in r.records().enumerate() {
        let line = row + 2;
        let record = record?;
        if record.len() != 6 {
            return Err(parse_err(line, format!("expected 6 fields, got {}", record.len())));
        }
        let num = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("field {}: {e}", i + 1)))
        };
        let index: usize = record[0]
            .trim()
            .parse()
            .map_err(|e| parse_err(line, format!("frame: {e}")))?;
        if index != row {
            return Err(parse_err(
                line,
                format!("frame indices must increase from 0 by 1; expected {row}, got {index}"),
            ));
        }
        frames.push(GroundTruthFrame {
            index,
            time_s: num(1)?,
            vehicle_m: [num(2)?, num(3)?],
            wheelchair_m: [num(4)?, num(5)?],
        });
    }

    if frames.len() < 2 {
        return Err(parse_err(1, "need at least 2 frames to infer the frame rate".into()));
    }
    let dt = frames[1].time_s - frames[0].time_s;
    if !(dt > 0.0) {
        return Err(parse_err(3, "timestamps must increase".into()));
    }
    Ok(GroundTruthSequence {
        frame_rate: 1.0 / dt,
        frames,
    })
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruthSequence> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_ground_truth(std::io::BufReader::new(file), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn static_config(vehicle: [f64; 2], speed: f64, seconds: f64) -> ScenarioConfig {
        ScenarioConfig {
            scenario: ScenarioId::A,
            duration_s: seconds,
            frame_rate: 30.0,
            vehicle: VehicleProfile {
                start_m: vehicle,
                heading: [-1.0, 0.0],
                initial_speed_mps: speed,
                segments: vec![MotionSegment {
                    duration_s: seconds,
                    accel_mps2: 0.0,
                }],
            },
            wheelchair: WheelchairPath {
                start_m: [0.0, 0.0],
                end_m: [0.0, 0.0],
                speed_mps: 0.0,
            },
            rng_seed: 0,
            jitter_sigma_m: 0.0,
        }
    }

    #[test]
    fn scenario_a_has_180_frames_at_30_fps() {
        let seq = simulate_scenario(&ScenarioConfig::default_a()).unwrap();
        assert_eq!(seq.len(), 180);
        let seq = simulate_scenario(&ScenarioConfig::default_b()).unwrap();
        assert_eq!(seq.len(), 270);
    }

    #[test]
    fn frame_times_follow_indices() {
        let seq = simulate_scenario(&ScenarioConfig::default_b()).unwrap();
        for (i, f) in seq.frames.iter().enumerate() {
            assert_eq!(f.index, i);
            assert_eq!(f.time_s, i as f64 / 30.0);
        }
    }

    #[test]
    fn stationary_vehicle_stays_put() {
        let seq = simulate_scenario(&static_config([3.0, 0.0], 0.0, 2.0)).unwrap();
        assert!(seq.frames.iter().all(|f| f.vehicle_m == [3.0, 0.0]));
    }

    #[test]
    fn uniform_approach_distance_at_two_seconds() {
        let seq = simulate_scenario(&static_config([3.0, 0.0], 0.5, 3.0)).unwrap();
        let f = &seq.frames[60];
        assert_eq!(f.time_s, 2.0);
        assert!((f.distance() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn piecewise_profile_integrates_in_closed_form() {
        let b = ScenarioConfig::default_b().vehicle;
        // 0.2·4 + ½·0.12·16 = 1.76 after the first leg
        assert!((b.travelled(4.0) - 1.76).abs() < 1e-12);
        // second leg starts at 0.68 m/s: 0.68·5 − ½·0.1·25 = 2.15
        assert!((b.travelled(9.0) - 3.91).abs() < 1e-12);
        // coasting at the final 0.18 m/s afterwards
        assert!((b.travelled(10.0) - 4.09).abs() < 1e-12);
    }

    #[test]
    fn wheelchair_stops_at_path_end() {
        let path = WheelchairPath {
            start_m: [0.0, -1.0],
            end_m: [0.0, 1.0],
            speed_mps: 1.0,
        };
        assert_eq!(path.position(1.0), [0.0, 0.0]);
        assert_eq!(path.position(5.0), [0.0, 1.0]);
    }

    #[test]
    fn rejects_non_positive_duration_or_rate() {
        let mut cfg = ScenarioConfig::default_a();
        cfg.duration_s = 0.0;
        assert!(matches!(simulate_scenario(&cfg), Err(Error::Config(_))));
        let mut cfg = ScenarioConfig::default_a();
        cfg.frame_rate = -30.0;
        assert!(matches!(simulate_scenario(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn jitter_is_seeded() {
        let mut cfg = ScenarioConfig::default_a();
        cfg.jitter_sigma_m = 0.01;
        cfg.rng_seed = 99;
        let a = simulate_scenario(&cfg).unwrap();
        let b = simulate_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.rng_seed = 100;
        assert_ne!(a, simulate_scenario(&cfg).unwrap());
    }

    #[test]
    fn static_agents_have_zero_rates() {
        let seq = simulate_scenario(&static_config([2.0, 1.0], 0.0, 1.0)).unwrap();
        for s in derive_kinematics(&seq, 5).unwrap() {
            assert_eq!(s.closing_speed, 0.0);
            assert_eq!(s.closing_accel, 0.0);
        }
    }

    #[test]
    fn linear_distance_gives_constant_closing_speed() {
        let d: Vec<f64> = (0..90).map(|i| 3.0 - 0.5 * i as f64 / 30.0).collect();
        let ks = kinematics_from_distances(&d, 30.0, 1).unwrap();
        for s in &ks[1..ks.len() - 1] {
            assert!((s.closing_speed - 0.5).abs() < 1e-9);
            assert!(s.closing_accel.abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_distance_gives_constant_closing_accel() {
        let d: Vec<f64> = (0..90)
            .map(|i| {
                let t = i as f64 / 30.0;
                3.0 - 0.25 * t * t
            })
            .collect();
        let ks = kinematics_from_distances(&d, 30.0, 1).unwrap();
        for s in &ks[1..ks.len() - 1] {
            assert!((s.closing_accel - 0.5).abs() < 1e-9, "{}", s.closing_accel);
        }
    }

    #[test]
    fn too_short_or_bad_window_is_rejected() {
        assert!(matches!(
            kinematics_from_distances(&[1.0, 2.0], 30.0, 1),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            kinematics_from_distances(&[1.0, 2.0, 3.0], 30.0, 4),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn ground_truth_csv_round_trips() {
        let seq = simulate_scenario(&ScenarioConfig::default_b()).unwrap();
        let mut buf = Vec::new();
        write_ground_truth(&seq, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("frame,t_s,veh_x_m,veh_y_m,aw_x_m,aw_y_m\n0,0,4,0,0,-0.8\n"));
        assert!(!text.contains('\r'));
        let back = read_ground_truth(buf.as_slice(), Path::new("mem.csv")).unwrap();
        assert_eq!(back.frames, seq.frames);
        assert!((back.frame_rate - 30.0).abs() < 1e-9);
    }

    #[test]
    fn ground_truth_csv_reports_line_of_bad_row() {
        let text = "frame,t_s,veh_x_m,veh_y_m,aw_x_m,aw_y_m\n0,0,1,0,0,0\n1,0.1,x,0,0,0\n";
        match read_ground_truth(text.as_bytes(), Path::new("gt.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
