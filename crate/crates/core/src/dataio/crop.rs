use super::Bbox;
use crate::warp::sample_clamped;
use crate::{Image, LandmarkSet, Result};

/// Crops `bbox` out of `img` and resizes it to `target x target` with plain
/// bilinear sampling.
///
/// Output pixel `(i, j)` reads source `(x1 + i·bw/target, y1 + j·bh/target)`,
/// so landmarks follow `((x - x1)·target/bw, (y - y1)·target/bh)`. Landmarks
/// that leave the crop are flagged out-of-frame; their coordinates are kept.
pub fn crop_resize(
    img: &Image,
    bbox: Bbox,
    landmarks: &LandmarkSet,
    target: usize,
) -> Result<(Image, LandmarkSet)> {
    if target == 0 || bbox.x1 >= bbox.x2 || bbox.y1 >= bbox.y2 || !bbox.fits(img.width(), img.height()) {
        return Err(bbox.invalid());
    }
    let sx = bbox.width() as f64 / target as f64;
    let sy = bbox.height() as f64 / target as f64;
    let (x1, y1) = (bbox.x1 as f64, bbox.y1 as f64);
    let (xmax, ymax) = ((bbox.x2 - 1) as f64, (bbox.y2 - 1) as f64);
    let c = img.channels();
    let mut data = vec![0.0; target * target * c];
    for (j, row) in data.chunks_exact_mut(target * c).enumerate() {
        let y = (y1 + j as f64 * sy).min(ymax);
        for (i, px) in row.chunks_exact_mut(c).enumerate() {
            let x = (x1 + i as f64 * sx).min(xmax);
            sample_clamped(img, x, y, px);
        }
    }
    let out = Image::from_raw(target, target, c, data);
    let lms = landmarks.map(|_, lm| {
        let mut m = *lm;
        m.x = (lm.x - x1) / sx;
        m.y = (lm.y - y1) / sy;
        m.with_bounds(target, target)
    });
    Ok((out, lms))
}
