use std::f64::consts::FRAC_PI_2;

use super::sample_clamped;
use crate::{Error, Image, LandmarkSet, Result};

/// `(cos θ, sin θ)`, snapped to exact values on multiples of 90° so that
/// quarter turns are pure pixel permutations.
pub fn rotation_cos_sin(theta: f64) -> (f64, f64) {
    let quarters = (theta / FRAC_PI_2).round();
    if (theta - quarters * FRAC_PI_2).abs() < 1e-12 {
        match (quarters as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        (theta.cos(), theta.sin())
    }
}

/// Rotates the content by `theta` about the canvas center `((w-1)/2, (h-1)/2)`,
/// keeping the canvas size. Output pixels whose source falls outside the
/// pixel extent `[-0.5, w-0.5] x [-0.5, h-0.5]` take `fill`.
pub fn rotate_image(img: &Image, theta: f64, fill: &[f64]) -> Result<Image> {
    if !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("rotation angle {theta}")));
    }
    if fill.len() != img.channels() {
        return Err(Error::shape(format!(
            "{} fill values for {} channels",
            fill.len(),
            img.channels()
        )));
    }
    if fill.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter("fill intensity outside [0, 1]".into()));
    }
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (cos, sin) = rotation_cos_sin(theta);
    let (xmax, ymax) = (w as f64 - 0.5, h as f64 - 0.5);
    let mut data = vec![0.0; w * h * c];
    for y in 0..h {
        let dy = y as f64 - cy;
        for x in 0..w {
            let dx = x as f64 - cx;
            // R(-θ) applied to the output offset
            let sx = cos * dx + sin * dy + cx;
            let sy = -sin * dx + cos * dy + cy;
            let out = &mut data[(y * w + x) * c..(y * w + x + 1) * c];
            if sx >= -0.5 && sx <= xmax && sy >= -0.5 && sy <= ymax {
                sample_clamped(img, sx, sy, out);
            } else {
                out.copy_from_slice(fill);
            }
        }
    }
    Ok(Image::from_raw(w, h, c, data))
}

/// Forward-maps landmarks: `l ↦ R(θ)(l - c) + c`. Results off the
/// `width x height` canvas become out-of-frame with their coordinates kept.
pub fn rotate_landmarks(
    lms: &LandmarkSet,
    theta: f64,
    center: (f64, f64),
    bounds: (usize, usize),
) -> LandmarkSet {
    let (cos, sin) = rotation_cos_sin(theta);
    let (cx, cy) = center;
    lms.map(|_, lm| {
        let (dx, dy) = (lm.x - cx, lm.y - cy);
        let mut out = *lm;
        out.x = cos * dx - sin * dy + cx;
        out.y = sin * dx + cos * dy + cy;
        out.with_bounds(bounds.0, bounds.1)
    })
}
