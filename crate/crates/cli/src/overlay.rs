//! Landmark crosses and heatmap tint drawn over an image.

use garment_augkit::heatmap::HeatmapStack;
use garment_augkit::{Error, Image, LandmarkSet, Result};

pub const CROSS_ARM: i64 = 5;
pub const CROSS_COLOR: [f64; 3] = [0.0, 0.0, 1.0];
pub const TINT_COLOR: [f64; 3] = [1.0, 0.0, 0.0];
/// Blend weight of the tint at heatmap value 1.
pub const TINT_ALPHA: f64 = 0.5;

/// RGB copy of `img` with the per-pixel maximum over `heatmaps` blended in
/// red, then a cross of `2 * CROSS_ARM + 1` pixels per in-frame landmark.
pub fn overlay(img: &Image, lms: &LandmarkSet, heatmaps: Option<&HeatmapStack>) -> Result<Image> {
    let (w, h) = (img.width(), img.height());
    let mut data: Vec<f64> = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let p = img.pixel(x, y);
            if p.len() == 1 {
                data.extend([p[0]; 3]);
            } else {
                data.extend_from_slice(p);
            }
        }
    }
    if let Some(hm) = heatmaps {
        if hm.width() != w || hm.height() != h {
            return Err(Error::Shape(format!(
                "heatmaps are {}x{}, image is {w}x{h}",
                hm.width(),
                hm.height()
            )));
        }
        for y in 0..h {
            for x in 0..w {
                let m = hm.planes().iter().map(|p| p[[y, x]]).fold(0.0, f64::max);
                let a = TINT_ALPHA * m.clamp(0.0, 1.0);
                if a == 0.0 {
                    continue;
                }
                let px = &mut data[(y * w + x) * 3..][..3];
                for (c, v) in px.iter_mut().enumerate() {
                    *v = (1.0 - a) * *v + a * TINT_COLOR[c];
                }
            }
        }
    }
    for (_, lm) in lms.iter() {
        if !lm.visibility.in_frame() || !lm.x.is_finite() || !lm.y.is_finite() {
            continue;
        }
        let (cx, cy) = (lm.x.round() as i64, lm.y.round() as i64);
        for d in -CROSS_ARM..=CROSS_ARM {
            for (x, y) in [(cx + d, cy), (cx, cy + d)] {
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                    let i = (y as usize * w + x as usize) * 3;
                    data[i..i + 3].copy_from_slice(&CROSS_COLOR);
                }
            }
        }
    }
    Image::new(w, h, 3, data)
}
