use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::color::{hls_to_rgb, rgb_to_hls, to_u8};
use super::{Condition, Frame, RainIntensity};
use crate::error::{Error, Result};

const STREAK_LENGTH_PX: usize = 20;
const STREAK_MAX_SLANT_DEG: f64 = 10.0;
const STREAK_COLOR: f64 = 200.0;
const STREAK_ALPHA: f64 = 0.7;
const RAIN_LIGHTNESS: f64 = 0.93;

fn check_unit(coeff: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&coeff) {
        return Err(Error::Parameter(format!(
            "{what} coefficient must lie in [0, 1], got {coeff}"
        )));
    }
    Ok(())
}

/// Scales HLS lightness by `factor`, capped at 1.
fn scale_lightness(f: &Frame, factor: f64) -> Frame {
    f.map_pixels(|[r, g, b]| {
        let (h, l, s) = rgb_to_hls(r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
        let (r, g, b) = hls_to_rgb(h, (l * factor).min(1.0), s);
        [to_u8(r), to_u8(g), to_u8(b)]
    })
}

pub fn apply_brightness(f: &Frame, coeff: f64) -> Result<Frame> {
    check_unit(coeff, "brightness")?;
    if coeff == 0.0 {
        return Ok(f.clone());
    }
    Ok(scale_lightness(f, 1.0 + coeff))
}

pub fn apply_darkness(f: &Frame, coeff: f64) -> Result<Frame> {
    check_unit(coeff, "darkness")?;
    if coeff == 0.0 {
        return Ok(f.clone());
    }
    Ok(scale_lightness(f, 1.0 - coeff))
}

/// Uniform white haze followed by one 3×3 box blur.
pub fn apply_fog(f: &Frame, coeff: f64) -> Result<Frame> {
    if !(coeff > 0.0 && coeff <= 1.0) {
        return Err(Error::Parameter(format!(
            "fog coefficient must lie in (0, 1], got {coeff}"
        )));
    }
    let mut hazed = f.clone();
    for p in hazed.pixels_mut() {
        *p = ((1.0 - coeff) * *p as f64 + coeff * 255.0 + 0.5).floor() as u8;
    }
    Ok(box_blur3(&hazed))
}

/// 3×3 mean filter with clamped edges; the mean is rounded half up.
pub fn box_blur3(f: &Frame) -> Frame {
    let (w, h) = (f.width(), f.height());
    let src = f.pixels();
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut sums = [0u32; 3];
            for dy in [-1isize, 0, 1] {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in [-1isize, 0, 1] {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    let i = (yy * w + xx) * 3;
                    for (c, s) in sums.iter_mut().enumerate() {
                        *s += src[i + c] as u32;
                    }
                }
            }
            let o = (y * w + x) * 3;
            for (c, s) in sums.iter().enumerate() {
                out[o + c] = ((2 * s + 9) / 18) as u8;
            }
        }
    }
    Frame::new(w, h, out).expect("same dimensions")
}

pub fn rain_streak_count(intensity: RainIntensity, width: usize, height: usize) -> usize {
    (intensity.density() * (width * height) as f64 / 1e6).round() as usize
}

/// Draws the rain streaks only, without darkening or blur.
///
/// Streaks are drawn in RNG order, so for a fixed seed a heavier intensity
/// paints a superset of the streaks of a lighter one.
pub fn overlay_rain_streaks(f: &Frame, intensity: RainIntensity, seed: u64) -> Frame {
    let (w, h) = (f.width(), f.height());
    let mut out = f.clone();
    if w == 0 || h == 0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = out.pixels_mut();
    for _ in 0..rain_streak_count(intensity, w, h) {
        let x0 = rng.random_range(0..w) as f64;
        let y0 = rng.random_range(0..h);
        let slant = rng
            .random_range(-STREAK_MAX_SLANT_DEG..=STREAK_MAX_SLANT_DEG)
            .to_radians()
            .tan();
        for j in 0..STREAK_LENGTH_PX {
            let y = y0 + j;
            let x = (x0 + j as f64 * slant).round();
            if y >= h || x < 0.0 || x >= w as f64 {
                continue;
            }
            let i = (y * w + x as usize) * 3;
            for p in &mut pixels[i..i + 3] {
                *p = (STREAK_ALPHA * STREAK_COLOR + (1.0 - STREAK_ALPHA) * *p as f64 + 0.5).floor()
                    as u8;
            }
        }
    }
    out
}

/// Seeded streak overlay, global darkening and one box blur.
pub fn apply_rain(f: &Frame, intensity: RainIntensity, seed: u64) -> Frame {
    let streaked = overlay_rain_streaks(f, intensity, seed);
    box_blur3(&scale_lightness(&streaked, RAIN_LIGHTNESS))
}

/// Applies the filter for `condition`; `seed` only matters for rain.
pub fn apply_condition(f: &Frame, condition: Condition, seed: u64) -> Frame {
    match condition {
        Condition::Original => f.clone(),
        Condition::Fog(l) => apply_fog(f, l.value()).expect("levels lie in (0, 1]"),
        Condition::Rain(r) => apply_rain(f, r, seed),
        Condition::Bright(l) => apply_brightness(f, l.value()).expect("levels lie in [0, 1]"),
        Condition::Dark(l) => apply_darkness(f, l.value()).expect("levels lie in [0, 1]"),
    }
}
