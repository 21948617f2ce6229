//! Environmental filters on RGB frames and the detection-degradation profiles
//! associated with each condition.

mod calibration;
mod color;
mod filters;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use calibration::{
    degradation_profile, DegradationProfile, DegradationTable, ProfileOverride,
    DEFAULT_NOISE_SIGMA, UNCALIBRATED_DETECT_PROB,
};
pub use color::{hls_to_rgb, rgb_to_hls};
pub use filters::{
    apply_brightness, apply_condition, apply_darkness, apply_fog, apply_rain, box_blur3,
    overlay_rain_streaks, rain_streak_count,
};

/// Filter strength for fog, brightness and darkness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    L03,
    L05,
    L07,
    L09,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::L03, Level::L05, Level::L07, Level::L09];

    pub fn value(self) -> f64 {
        match self {
            Level::L03 => 0.3,
            Level::L05 => 0.5,
            Level::L07 => 0.7,
            Level::L09 => 0.9,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Level::L03 => "0.3",
            Level::L05 => "0.5",
            Level::L07 => "0.7",
            Level::L09 => "0.9",
        }
    }

    fn parse(s: &str) -> Option<Level> {
        Level::ALL.into_iter().find(|l| l.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RainIntensity {
    Drizzle,
    Heavy,
    Torrential,
}

impl RainIntensity {
    pub const ALL: [RainIntensity; 3] = [
        RainIntensity::Drizzle,
        RainIntensity::Heavy,
        RainIntensity::Torrential,
    ];

    /// Streaks per megapixel.
    pub fn density(self) -> f64 {
        match self {
            RainIntensity::Drizzle => 150.0,
            RainIntensity::Heavy => 600.0,
            RainIntensity::Torrential => 1200.0,
        }
    }

    fn label(self) -> &'static str {
        match self {
            RainIntensity::Drizzle => "drizzle",
            RainIntensity::Heavy => "heavy",
            RainIntensity::Torrential => "torrential",
        }
    }
}

/// A named environmental perturbation.
///
/// The textual form is `original`, `fog_<c>`, `rain_<type>`, `bright_<c>` or
/// `dark_<c>`, e.g. `fog_0.5` or `rain_heavy`. Fog accepts 0.3, 0.5 and 0.7;
/// brightness and darkness also accept 0.9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Condition {
    Original,
    Fog(Level),
    Rain(RainIntensity),
    Bright(Level),
    Dark(Level),
}

impl Condition {
    /// The seven conditions with published recognition rates, in table order.
    pub fn calibrated() -> Vec<Condition> {
        vec![
            Condition::Original,
            Condition::Fog(Level::L03),
            Condition::Fog(Level::L05),
            Condition::Rain(RainIntensity::Drizzle),
            Condition::Rain(RainIntensity::Heavy),
            Condition::Bright(Level::L05),
            Condition::Dark(Level::L05),
        ]
    }

    /// Every condition a filter exists for.
    pub fn all() -> Vec<Condition> {
        let mut out = vec![Condition::Original];
        out.extend([Level::L03, Level::L05, Level::L07].map(Condition::Fog));
        out.extend(RainIntensity::ALL.map(Condition::Rain));
        out.extend(Level::ALL.map(Condition::Bright));
        out.extend(Level::ALL.map(Condition::Dark));
        out
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Original => f.write_str("original"),
            Condition::Fog(l) => write!(f, "fog_{}", l.label()),
            Condition::Rain(r) => write!(f, "rain_{}", r.label()),
            Condition::Bright(l) => write!(f, "bright_{}", l.label()),
            Condition::Dark(l) => write!(f, "dark_{}", l.label()),
        }
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || {
            let valid: Vec<String> = Condition::all().iter().map(ToString::to_string).collect();
            Error::Config(format!(
                "unknown condition `{s}`; expected one of: {}",
                valid.join(", ")
            ))
        };
        if s == "original" {
            return Ok(Condition::Original);
        }
        let (kind, level) = s.split_once('_').ok_or_else(unknown)?;
        match kind {
            "fog" => match Level::parse(level) {
                Some(l) if l != Level::L09 => Ok(Condition::Fog(l)),
                _ => Err(unknown()),
            },
            "bright" => Level::parse(level).map(Condition::Bright).ok_or_else(unknown),
            "dark" => Level::parse(level).map(Condition::Dark).ok_or_else(unknown),
            "rain" => RainIntensity::ALL
                .into_iter()
                .find(|r| r.label() == level)
                .map(Condition::Rain)
                .ok_or_else(unknown),
            _ => Err(unknown()),
        }
    }
}

impl TryFrom<String> for Condition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> String {
        c.to_string()
    }
}

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height * 3 {
            return Err(Error::Parameter(format!(
                "frame {width}×{height} needs {} bytes, got {}",
                width * height * 3,
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Frame {
            width,
            height,
            pixels: rgb.repeat(width * height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub(crate) fn map_pixels(&self, mut f: impl FnMut([u8; 3]) -> [u8; 3]) -> Frame {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for px in self.pixels.chunks_exact(3) {
            pixels.extend_from_slice(&f([px[0], px[1], px[2]]));
        }
        Frame {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    /// Rec. 601 luma per pixel, on the 0–255 scale.
    pub fn luminance(&self) -> Vec<f64> {
        self.pixels
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
            .collect()
    }

    pub fn mean_luminance(&self) -> f64 {
        let l = self.luminance();
        if l.is_empty() {
            return 0.0;
        }
        l.iter().sum::<f64>() / l.len() as f64
    }

    /// Population standard deviation of the luma.
    pub fn luminance_std(&self) -> f64 {
        let l = self.luminance();
        if l.is_empty() {
            return 0.0;
        }
        let mean = l.iter().sum::<f64>() / l.len() as f64;
        (l.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / l.len() as f64).sqrt()
    }

    /// Loads a PNG as 8-bit RGB, dropping any alpha channel.
    pub fn load_png(path: &Path) -> Result<Frame> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Frame::new(w as usize, h as usize, rgb.into_raw())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let buf = image::RgbImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .ok_or_else(|| Error::Contract("pixel buffer does not match frame size".into()))?;
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_names_round_trip() {
        for c in Condition::all() {
            assert_eq!(c.to_string().parse::<Condition>().unwrap(), c);
        }
        assert_eq!(Condition::all().len(), 1 + 3 + 3 + 4 + 4);
    }

    #[test]
    fn invalid_conditions_are_rejected() {
        for bad in ["snow", "fog_0.9", "fog_0.4", "rain_monsoon", "bright", "dark_1.0", ""] {
            let err = bad.parse::<Condition>().unwrap_err();
            assert!(err.to_string().contains(&format!("`{bad}`")), "{err}");
        }
    }

    #[test]
    fn condition_serializes_as_string() {
        let json = serde_json::to_string(&Condition::Rain(RainIntensity::Heavy)).unwrap();
        assert_eq!(json, "\"rain_heavy\"");
        let back: Condition = serde_json::from_str("\"dark_0.5\"").unwrap();
        assert_eq!(back, Condition::Dark(Level::L05));
        assert!(serde_json::from_str::<Condition>("\"snow\"").is_err());
    }

    #[test]
    fn frame_size_is_checked() {
        assert!(Frame::new(2, 2, vec![0; 12]).is_ok());
        assert!(Frame::new(2, 2, vec![0; 11]).is_err());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.png");
        let frame = Frame::new(2, 1, vec![1, 2, 3, 250, 128, 0]).unwrap();
        frame.save_png(&path).unwrap();
        assert_eq!(Frame::load_png(&path).unwrap(), frame);
    }
}
