//! Distance-level fusion of the per-channel measurements.
//!
//! A-Fusion averages every channel, imputed or not. W-Fusion averages only
//! real measurements and falls back to the reference distance when a frame
//! has none.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perception::{ChannelSeries, DistanceMeasurement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMethod {
    AFusion,
    WFusion,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 2] = [FusionMethod::AFusion, FusionMethod::WFusion];

    pub fn as_str(self) -> &'static str {
        match self {
            FusionMethod::AFusion => "a_fusion",
            FusionMethod::WFusion => "w_fusion",
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedSeries {
    pub method: FusionMethod,
    pub distances: Vec<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn a_fusion(ms: &[DistanceMeasurement]) -> Result<f64> {
    mean(ms.iter().map(|m| m.value))
        .ok_or_else(|| Error::Contract("a_fusion needs at least one measurement".into()))
}

pub fn w_fusion(ms: &[DistanceMeasurement], reference_max: f64) -> Result<f64> {
    if ms.is_empty() {
        return Err(Error::Contract("w_fusion needs at least one measurement".into()));
    }
    Ok(mean(ms.iter().filter(|m| m.is_real()).map(|m| m.value)).unwrap_or(reference_max))
}

pub fn fuse_frame(
    ms: &[DistanceMeasurement],
    method: FusionMethod,
    reference_max: f64,
) -> Result<f64> {
    match method {
        FusionMethod::AFusion => a_fusion(ms),
        FusionMethod::WFusion => w_fusion(ms, reference_max),
    }
}

/// Fuses aligned channel series frame by frame. Only the channels passed in
/// take part; an absent camera is simply not in `channels`.
pub fn fuse_series(
    channels: &[ChannelSeries],
    method: FusionMethod,
    reference_max: f64,
) -> Result<FusedSeries> {
    let n = channels
        .first()
        .ok_or_else(|| Error::Contract("fusion needs at least one channel".into()))?
        .measurements
        .len();
    if channels.iter().any(|c| c.measurements.len() != n) {
        return Err(Error::Contract("channel series differ in length".into()));
    }
    let mut frame = Vec::with_capacity(channels.len());
    let distances = (0..n)
        .map(|i| {
            frame.clear();
            frame.extend(channels.iter().map(|c| c.measurements[i]));
            fuse_frame(&frame, method, reference_max)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FusedSeries { method, distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::{Camera, Channel, DetectorModel};

    fn worked_example() -> Vec<DistanceMeasurement> {
        vec![
            DistanceMeasurement::real(2.0),
            DistanceMeasurement::imputed(4.0),
            DistanceMeasurement::real(3.0),
            DistanceMeasurement::imputed(4.0),
        ]
    }

    #[test]
    fn a_fusion_examples() {
        assert_eq!(a_fusion(&worked_example()).unwrap(), 3.25);
        assert_eq!(a_fusion(&[DistanceMeasurement::real(1.7); 4]).unwrap(), 1.7);
        assert_eq!(a_fusion(&[DistanceMeasurement::real(1.0)]).unwrap(), 1.0);
        assert!(a_fusion(&[]).is_err());
    }

    #[test]
    fn w_fusion_examples() {
        assert_eq!(w_fusion(&worked_example(), 4.0).unwrap(), 2.5);
        assert_eq!(w_fusion(&[DistanceMeasurement::imputed(4.0); 4], 4.0).unwrap(), 4.0);
        let all_real = [2.0, 2.5, 3.5, 1.0].map(DistanceMeasurement::real);
        assert_eq!(w_fusion(&all_real, 4.0).unwrap(), a_fusion(&all_real).unwrap());
        assert!(w_fusion(&[], 4.0).is_err());
    }

    #[test]
    fn series_fusion_is_framewise() {
        let ch = |m, values: &[DistanceMeasurement]| ChannelSeries {
            channel: Channel::new(Camera::Drone, m),
            measurements: values.to_vec(),
        };
        let a = ch(DetectorModel::Y5, &[DistanceMeasurement::real(2.0), DistanceMeasurement::imputed(4.0)]);
        let b = ch(DetectorModel::Y8, &[DistanceMeasurement::imputed(4.0), DistanceMeasurement::imputed(4.0)]);
        let w = fuse_series(&[a.clone(), b.clone()], FusionMethod::WFusion, 4.0).unwrap();
        assert_eq!(w.distances, [2.0, 4.0]);
        let af = fuse_series(&[a, b], FusionMethod::AFusion, 4.0).unwrap();
        assert_eq!(af.distances, [3.0, 4.0]);
        assert!(fuse_series(&[], FusionMethod::AFusion, 4.0).is_err());
    }
}
