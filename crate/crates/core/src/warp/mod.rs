//! Geometric image transforms.
//!
//! All transforms are inverse mappings: every output pixel `(x̃, ỹ)` reads the
//! input at a source location `(x(x̃, ỹ), y(x̃, ỹ))` through bilinear
//! interpolation.

mod elastic;
mod field;
mod kernel;
mod rotate;

pub use elastic::{apply_fields, elastic_warp, elastic_warp_with, warp_landmarks, ElasticOutput};
pub use field::{
    make_displacement_fields, sample_sparse_fields, smooth_fields, DisplacementFieldPair,
    ElasticParams, FieldStage,
};
pub use kernel::{gaussian_kernel, GaussianKernel, Normalization, DEFAULT_TRUNCATION};
pub use rotate::{rotate_image, rotate_landmarks, rotation_cos_sin};

use crate::{Error, Image, Result};

/// Bilinear sample of every channel at `(x, y)`.
///
/// Coordinates are clamped to the pixel-center grid `[0, w-1] x [0, h-1]`
/// first (replicate padding), so the call never reads outside the image.
pub fn bilinear_sample(img: &Image, x: f64, y: f64) -> Result<Vec<f64>> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidCoordinate { x, y });
    }
    let mut out = vec![0.0; img.channels()];
    sample_clamped(img, x, y, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn sample_clamped(img: &Image, x: f64, y: f64, out: &mut [f64]) {
    let (w, h) = (img.width(), img.height());
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let w00 = (1.0 - fx) * (1.0 - fy);
    let w01 = fx * (1.0 - fy);
    let w10 = (1.0 - fx) * fy;
    let w11 = fx * fy;
    let (p00, p01, p10, p11) = (
        img.pixel(x0, y0),
        img.pixel(x1, y0),
        img.pixel(x0, y1),
        img.pixel(x1, y1),
    );
    for c in 0..out.len() {
        let v = w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c];
        out[c] = v.clamp(0.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> Image {
        // [[0,2],[4,6]] scaled into [0,1]
        Image::new(2, 2, 1, vec![0.0, 0.2, 0.4, 0.6]).unwrap()
    }

    #[test]
    fn grid_points_are_exact() {
        let img = Image::from_fn(4, 4, 1, |x, y, _| ((x * 7 + y * 3) % 11) as f64 / 10.0).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let v = bilinear_sample(&img, x as f64, y as f64).unwrap();
                assert_eq!(v[0], img.get(x, y, 0));
            }
        }
        assert_eq!(bilinear_sample(&img, 2.0, 1.0).unwrap()[0], img.get(2, 1, 0));
    }

    #[test]
    fn center_of_four() {
        let v = bilinear_sample(&two_by_two(), 0.5, 0.5).unwrap()[0];
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quarter_along_x() {
        // 0 + 0.25 * (2 - 0) = 0.5 in the unscaled image
        let v = bilinear_sample(&two_by_two(), 0.25, 0.0).unwrap()[0];
        assert!((v - 0.05).abs() < 1e-15);
    }

    #[test]
    fn linear_between_neighbours() {
        let img = two_by_two();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let v = bilinear_sample(&img, t, 1.0).unwrap()[0];
            assert!((v - (0.4 + 0.2 * t)).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_range_is_replicated() {
        let img = two_by_two();
        assert_eq!(bilinear_sample(&img, -0.5, -3.0).unwrap()[0], 0.0);
        assert_eq!(bilinear_sample(&img, 1.5, 9.0).unwrap()[0], 0.6);
    }

    #[test]
    fn non_finite_coordinate() {
        assert!(matches!(
            bilinear_sample(&two_by_two(), f64::NAN, 0.0),
            Err(Error::InvalidCoordinate { .. })
        ));
    }
}
