//! RGB ↔ HLS on unit-interval channels (hue in turns).

pub fn rgb_to_hls(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (min + max) / 2.0;
    if max == min {
        return (0.0, l, 0.0);
    }
    let span = max - min;
    let s = if l <= 0.5 {
        span / (max + min)
    } else {
        span / (2.0 - max - min)
    };
    let rc = (max - r) / span;
    let gc = (max - g) / span;
    let bc = (max - b) / span;
    let h = if r == max {
        bc - gc
    } else if g == max {
        2.0 + rc - bc
    } else {
        4.0 + gc - rc
    };
    ((h / 6.0).rem_euclid(1.0), l, s)
}

pub fn hls_to_rgb(h: f64, l: f64, s: f64) -> (f64, f64, f64) {
    if s == 0.0 {
        return (l, l, l);
    }
    let m2 = if l <= 0.5 { l * (1.0 + s) } else { l + s - l * s };
    let m1 = 2.0 * l - m2;
    (
        channel(m1, m2, h + 1.0 / 3.0),
        channel(m1, m2, h),
        channel(m1, m2, h - 1.0 / 3.0),
    )
}

fn channel(m1: f64, m2: f64, hue: f64) -> f64 {
    let hue = hue.rem_euclid(1.0);
    if hue < 1.0 / 6.0 {
        m1 + (m2 - m1) * hue * 6.0
    } else if hue < 0.5 {
        m2
    } else if hue < 2.0 / 3.0 {
        m1 + (m2 - m1) * (2.0 / 3.0 - hue) * 6.0
    } else {
        m1
    }
}

/// Unit interval to 8 bits, rounding half up.
pub(crate) fn to_u8(x: f64) -> u8 {
    (x * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primaries() {
        assert_eq!(rgb_to_hls(1.0, 0.0, 0.0), (0.0, 0.5, 1.0));
        let (h, l, s) = rgb_to_hls(0.0, 1.0, 0.0);
        assert!((h - 1.0 / 3.0).abs() < 1e-12 && l == 0.5 && s == 1.0);
        assert_eq!(rgb_to_hls(0.5, 0.5, 0.5), (0.0, 0.5, 0.0));
    }

    #[test]
    fn every_8bit_color_survives_round_trip() {
        for r in (0..=255u16).step_by(5) {
            for g in (0..=255u16).step_by(3) {
                for b in (0..=255u16).step_by(7) {
                    let f = |c: u16| c as f64 / 255.0;
                    let (h, l, s) = rgb_to_hls(f(r), f(g), f(b));
                    let (r2, g2, b2) = hls_to_rgb(h, l, s);
                    assert_eq!(
                        [to_u8(r2), to_u8(g2), to_u8(b2)],
                        [r as u8, g as u8, b as u8]
                    );
                }
            }
        }
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(to_u8(0.5 / 255.0), 1);
        assert_eq!(to_u8(0.49 / 255.0), 0);
        assert_eq!(to_u8(1.2), 255);
    }
}
