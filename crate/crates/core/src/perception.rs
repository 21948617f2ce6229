//! Per-channel distance measurements.
//!
//! A channel is one (camera, detector) stream. Its per-frame distances come
//! either from a calibrated stochastic detector or from ingested bounding
//! boxes, and frames where nothing was detected are filled by an imputation
//! policy so every channel has exactly one measurement per frame.

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::augment::DegradationProfile;
use crate::error::{Error, Result};
use crate::seed::frame_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Camera {
    Drone,
    Aw,
}

impl Camera {
    pub const ALL: [Camera; 2] = [Camera::Drone, Camera::Aw];

    pub fn as_str(self) -> &'static str {
        match self {
            Camera::Drone => "drone",
            Camera::Aw => "aw",
        }
    }
}

impl FromStr for Camera {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drone" => Ok(Camera::Drone),
            "aw" => Ok(Camera::Aw),
            other => Err(Error::Config(format!("unknown camera `{other}`"))),
        }
    }
}

/// Detector applied to a camera's frames: generic pre-trained (Y5) or
/// fine-tuned on the vehicle robot (Y8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorModel {
    Y5,
    Y8,
}

impl DetectorModel {
    pub const ALL: [DetectorModel; 2] = [DetectorModel::Y5, DetectorModel::Y8];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorModel::Y5 => "Y5",
            DetectorModel::Y8 => "Y8",
        }
    }
}

impl FromStr for DetectorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Y5" => Ok(DetectorModel::Y5),
            "Y8" => Ok(DetectorModel::Y8),
            other => Err(Error::Config(format!("unknown detector model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub camera: Camera,
    pub model: DetectorModel,
}

impl Channel {
    pub const fn new(camera: Camera, model: DetectorModel) -> Self {
        Channel { camera, model }
    }

    /// The four channels in report order: drone Y5, drone Y8, AW Y5, AW Y8.
    pub fn all() -> Vec<Channel> {
        Camera::ALL
            .iter()
            .flat_map(|&c| DetectorModel::ALL.iter().map(move |&m| Channel::new(c, m)))
            .collect()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.camera.as_str(), self.model.as_str())
    }
}

/// Pinhole camera used to turn box widths into distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub focal_length_px: f64,
    /// Physical width of the tracked vehicle robot.
    pub object_width_m: f64,
    /// Farthest distance of interest; also the reference fill value.
    pub max_distance_m: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            focal_length_px: 500.0,
            object_width_m: 0.4,
            max_distance_m: 4.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length_px > 0.0 && self.object_width_m > 0.0 && self.max_distance_m > 0.0)
        {
            return Err(Error::Config(
                "camera model: focal length, object width and max distance must be positive"
                    .into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Real,
    Imputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceMeasurement {
    pub value: f64,
    pub provenance: Provenance,
}

impl DistanceMeasurement {
    pub fn real(value: f64) -> Self {
        DistanceMeasurement {
            value,
            provenance: Provenance::Real,
        }
    }

    pub fn imputed(value: f64) -> Self {
        DistanceMeasurement {
            value,
            provenance: Provenance::Imputed,
        }
    }

    pub fn is_real(&self) -> bool {
        self.provenance == Provenance::Real
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries {
    pub channel: Channel,
    pub measurements: Vec<DistanceMeasurement>,
}

impl ChannelSeries {
    pub fn values(&self) -> Vec<f64> {
        self.measurements.iter().map(|m| m.value).collect()
    }
}

/// What to report for a frame in which the channel saw nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputationPolicy {
    /// Fill with the camera's maximum distance of interest.
    #[default]
    ReferenceMax,
    /// Repeat the last real value; falls back to the maximum distance before
    /// the first detection.
    HoldLast,
}

pub fn bbox_to_distance(b: &BoundingBox, cam: &CameraModel) -> Result<f64> {
    if !(b.w > 0.0) {
        return Err(Error::InvalidBox(b.w));
    }
    Ok((cam.focal_length_px * cam.object_width_m / b.w).min(cam.max_distance_m))
}

/// One frame of the stochastic detector.
///
/// Targets beyond the camera's range are never detected. Otherwise the target
/// is seen with probability `prof.detect_prob` and its distance is perturbed
/// by Gaussian noise, clamped to `[0, max_distance]`.
pub fn synth_detect<R: Rng + ?Sized>(
    true_distance: f64,
    prof: &DegradationProfile,
    cam: &CameraModel,
    rng: &mut R,
) -> Option<f64> {
    if true_distance > cam.max_distance_m {
        return None;
    }
    let hit = rng.random::<f64>() < prof.detect_prob;
    if !hit {
        return None;
    }
    let noise = if prof.noise_sigma > 0.0 {
        Normal::new(0.0, prof.noise_sigma)
            .map(|n| n.sample(rng))
            .unwrap_or(0.0)
    } else {
        0.0
    };
    Some((true_distance + noise).clamp(0.0, cam.max_distance_m))
}

pub fn impute(
    m: Option<f64>,
    policy: ImputationPolicy,
    cam: &CameraModel,
    last_real: Option<f64>,
) -> DistanceMeasurement {
    match (m, policy) {
        (Some(v), _) => DistanceMeasurement::real(v),
        (None, ImputationPolicy::ReferenceMax) => DistanceMeasurement::imputed(cam.max_distance_m),
        (None, ImputationPolicy::HoldLast) => {
            DistanceMeasurement::imputed(last_real.unwrap_or(cam.max_distance_m))
        }
    }
}

/// Applies [`impute`] along a raw detection series.
pub fn impute_series(
    raw: &[Option<f64>],
    policy: ImputationPolicy,
    cam: &CameraModel,
) -> Vec<DistanceMeasurement> {
    let mut last_real = None;
    raw.iter()
        .map(|&m| {
            let out = impute(m, policy, cam, last_real);
            if m.is_some() {
                last_real = m;
            }
            out
        })
        .collect()
}

/// Synthetic channel over a ground-truth distance series.
///
/// Frame `i` draws from its own stream `(stream_seed, i)`.
pub fn synth_channel(
    channel: Channel,
    true_distances: &[f64],
    prof: &DegradationProfile,
    cam: &CameraModel,
    policy: ImputationPolicy,
    stream_seed: u64,
) -> ChannelSeries {
    let raw: Vec<Option<f64>> = true_distances
        .iter()
        .enumerate()
        .map(|(i, &d)| synth_detect(d, prof, cam, &mut frame_rng(stream_seed, i as u64)))
        .collect();
    ChannelSeries {
        channel,
        measurements: impute_series(&raw, policy, cam),
    }
}

/// One line of a detection file.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub frame: usize,
    pub channel: Channel,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

#[derive(Deserialize)]
struct RawRecord {
    frame: i64,
    camera: String,
    model: String,
    bbox: [f64; 4],
    #[serde(default)]
    confidence: f64,
}

/// Parses a JSON Lines detection file. Blank lines are skipped.
pub fn read_detections<R: BufRead>(
    reader: R,
    origin: &Path,
    n_frames: usize,
) -> Result<Vec<DetectionRecord>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| err(lineno, e.to_string()))?;
        let channel = match (raw.camera.parse(), raw.model.parse()) {
            (Ok(camera), Ok(model)) => Channel::new(camera, model),
            _ => {
                return Err(err(
                    lineno,
                    format!("unknown channel `{}/{}`", raw.camera, raw.model),
                ))
            }
        };
        if raw.frame < 0 || raw.frame as usize >= n_frames {
            return Err(err(
                lineno,
                format!("frame {} outside [0, {n_frames})", raw.frame),
            ));
        }
        let [x, y, w, h] = raw.bbox;
        if !(w > 0.0 && h > 0.0) {
            return Err(err(lineno, format!("bbox width and height must be positive, got {w}×{h}")));
        }
        records.push(DetectionRecord {
            frame: raw.frame as usize,
            channel,
            bbox: BoundingBox { x, y, w, h },
            confidence: raw.confidence,
        });
    }
    Ok(records)
}

/// Builds one channel's series from parsed records, keeping the widest box
/// (the nearest object) on frames with several detections.
pub fn series_from_detections(
    records: &[DetectionRecord],
    channel: Channel,
    cam: &CameraModel,
    n_frames: usize,
    policy: ImputationPolicy,
) -> Result<ChannelSeries> {
    let mut widest: Vec<Option<f64>> = vec![None; n_frames];
    for r in records.iter().filter(|r| r.channel == channel) {
        let slot = widest.get_mut(r.frame).ok_or_else(|| {
            Error::Contract(format!("frame {} outside [0, {n_frames})", r.frame))
        })?;
        if slot.is_none_or(|w| r.bbox.w > w) {
            *slot = Some(r.bbox.w);
        }
    }
    let raw = widest
        .into_iter()
        .map(|w| {
            w.map(|w| bbox_to_distance(&BoundingBox { x: 0.0, y: 0.0, w, h: 1.0 }, cam))
                .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelSeries {
        channel,
        measurements: impute_series(&raw, policy, cam),
    })
}

pub fn ingest_detections(
    path: &Path,
    channel: Channel,
    cam: &CameraModel,
    n_frames: usize,
    policy: ImputationPolicy,
) -> Result<ChannelSeries> {
    let records = load_detections(path, n_frames)?;
    series_from_detections(&records, channel, cam, n_frames, policy)
}

pub fn load_detections(path: &Path, n_frames: usize) -> Result<Vec<DetectionRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_detections(std::io::BufReader::new(file), path, n_frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drone_y8() -> Channel {
        Channel::new(Camera::Drone, DetectorModel::Y8)
    }

    fn bbox(w: f64) -> BoundingBox {
        BoundingBox {
            x: 0.0,
            y: 0.0,
            w,
            h: 10.0,
        }
    }

    #[test]
    fn pinhole_examples() {
        let cam = CameraModel::default();
        assert_eq!(bbox_to_distance(&bbox(100.0), &cam).unwrap(), 2.0);
        assert_eq!(bbox_to_distance(&bbox(50.0), &cam).unwrap(), 4.0);
        assert_eq!(bbox_to_distance(&bbox(10.0), &cam).unwrap(), 4.0);
        assert!(matches!(bbox_to_distance(&bbox(0.0), &cam), Err(Error::InvalidBox(_))));
    }

    #[test]
    fn degenerate_detectors() {
        let cam = CameraModel::default();
        let mut rng = frame_rng(3, 0);
        let certain = DegradationProfile {
            detect_prob: 1.0,
            noise_sigma: 0.0,
        };
        let blind = DegradationProfile {
            detect_prob: 0.0,
            noise_sigma: 0.1,
        };
        for _ in 0..100 {
            assert_eq!(synth_detect(2.3, &certain, &cam, &mut rng), Some(2.3));
            assert_eq!(synth_detect(2.3, &blind, &cam, &mut rng), None);
        }
        assert_eq!(synth_detect(4.5, &certain, &cam, &mut rng), None);
    }

    #[test]
    fn imputation_examples() {
        let cam = CameraModel::default();
        for policy in [ImputationPolicy::ReferenceMax, ImputationPolicy::HoldLast] {
            assert_eq!(impute(Some(2.3), policy, &cam, None), DistanceMeasurement::real(2.3));
        }
        assert_eq!(
            impute(None, ImputationPolicy::ReferenceMax, &cam, Some(2.1)),
            DistanceMeasurement::imputed(4.0)
        );
        assert_eq!(
            impute(None, ImputationPolicy::HoldLast, &cam, Some(2.1)),
            DistanceMeasurement::imputed(2.1)
        );
        assert_eq!(
            impute(None, ImputationPolicy::HoldLast, &cam, None),
            DistanceMeasurement::imputed(4.0)
        );
    }

    #[test]
    fn hold_last_tracks_latest_detection() {
        let cam = CameraModel::default();
        let raw = [None, Some(3.0), None, Some(2.5), None, None];
        let vals: Vec<f64> = impute_series(&raw, ImputationPolicy::HoldLast, &cam)
            .iter()
            .map(|m| m.value)
            .collect();
        assert_eq!(vals, [4.0, 3.0, 3.0, 2.5, 2.5, 2.5]);
    }

    #[test]
    fn synthetic_channel_is_reproducible() {
        let cam = CameraModel::default();
        let prof = DegradationProfile {
            detect_prob: 0.5,
            noise_sigma: 0.1,
        };
        let truth: Vec<f64> = (0..100).map(|i| 3.0 - i as f64 * 0.01).collect();
        let a = synth_channel(drone_y8(), &truth, &prof, &cam, ImputationPolicy::ReferenceMax, 11);
        let b = synth_channel(drone_y8(), &truth, &prof, &cam, ImputationPolicy::ReferenceMax, 11);
        assert_eq!(a, b);
        assert_eq!(a.measurements.len(), 100);
    }

    #[test]
    fn empty_detection_file_imputes_everything() {
        let cam = CameraModel::default();
        let recs = read_detections("".as_bytes(), Path::new("d.jsonl"), 10).unwrap();
        let s = series_from_detections(&recs, drone_y8(), &cam, 10, ImputationPolicy::ReferenceMax)
            .unwrap();
        assert_eq!(s.measurements, vec![DistanceMeasurement::imputed(4.0); 10]);
    }

    #[test]
    fn single_record_becomes_real_measurement() {
        let cam = CameraModel::default();
        let text = r#"{"frame": 3, "camera": "drone", "model": "Y8", "bbox": [10, 20, 100, 40], "confidence": 0.8}"#;
        let recs = read_detections(text.as_bytes(), Path::new("d.jsonl"), 10).unwrap();
        assert_eq!(recs[0].confidence, 0.8);
        let s = series_from_detections(&recs, drone_y8(), &cam, 10, ImputationPolicy::ReferenceMax)
            .unwrap();
        assert_eq!(s.measurements[3], DistanceMeasurement::real(2.0));
        assert_eq!(s.measurements.iter().filter(|m| m.is_real()).count(), 1);
    }

    #[test]
    fn widest_box_wins() {
        let cam = CameraModel::default();
        let text = concat!(
            r#"{"frame": 1, "camera": "drone", "model": "Y8", "bbox": [0, 0, 50, 40], "confidence": 0.9}"#,
            "\n",
            r#"{"frame": 1, "camera": "drone", "model": "Y8", "bbox": [0, 0, 100, 40], "confidence": 0.4}"#,
            "\n",
            r#"{"frame": 1, "camera": "aw", "model": "Y8", "bbox": [0, 0, 400, 40], "confidence": 0.4}"#,
            "\n"
        );
        let recs = read_detections(text.as_bytes(), Path::new("d.jsonl"), 5).unwrap();
        let s = series_from_detections(&recs, drone_y8(), &cam, 5, ImputationPolicy::ReferenceMax)
            .unwrap();
        assert_eq!(s.measurements[1], DistanceMeasurement::real(2.0));
    }

    #[test]
    fn ingestion_errors_carry_line_numbers() {
        let cases = [
            ("{\"frame\": 0, \"camera\": \"drone\", \"model\": \"Y8\", \"bbox\": [0,0,1,1]}\nnot json", 2),
            ("{\"frame\": 0, \"camera\": \"thermal\", \"model\": \"Y8\", \"bbox\": [0,0,1,1]}", 1),
            ("\n{\"frame\": 12, \"camera\": \"aw\", \"model\": \"Y5\", \"bbox\": [0,0,1,1]}", 2),
            ("{\"frame\": 0, \"camera\": \"aw\", \"model\": \"Y5\", \"bbox\": [0,0,0,1]}", 1),
        ];
        for (text, want) in cases {
            match read_detections(text.as_bytes(), Path::new("d.jsonl"), 10) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
        let err = read_detections(cases[1].0.as_bytes(), Path::new("d.jsonl"), 10).unwrap_err();
        assert!(err.to_string().contains("unknown channel `thermal/Y8`"));
    }

    #[test]
    fn channel_labels() {
        let labels: Vec<String> = Channel::all().iter().map(ToString::to_string).collect();
        assert_eq!(labels, ["drone_Y5", "drone_Y8", "aw_Y5", "aw_Y8"]);
    }
}
