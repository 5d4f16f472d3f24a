use super::field::{make_displacement_fields, DisplacementFieldPair, ElasticParams};
use super::sample_clamped;
use crate::lmmap::{default_candidate_count, invert_landmark};
use crate::{Error, Image, LandmarkSet, Result, RngStream};

#[derive(Debug, Clone)]
pub struct ElasticOutput {
    pub image: Image,
    pub landmarks: LandmarkSet,
    /// The smoothed fields, kept so callers can audit the landmark mapping.
    pub fields: DisplacementFieldPair,
}

/// Elastic warp with the candidate count scaled to the image size.
pub fn elastic_warp(
    img: &Image,
    lms: &LandmarkSet,
    params: &ElasticParams,
    rng: &mut RngStream,
) -> Result<ElasticOutput> {
    let n = default_candidate_count(img.width(), img.height());
    elastic_warp_with(img, lms, params, rng, n)
}

pub fn elastic_warp_with(
    img: &Image,
    lms: &LandmarkSet,
    params: &ElasticParams,
    rng: &mut RngStream,
    candidates: usize,
) -> Result<ElasticOutput> {
    let fields = make_displacement_fields(img.width(), img.height(), params, rng)?;
    let image = apply_fields(img, &fields)?;
    let landmarks = warp_landmarks(&fields, lms, candidates);
    Ok(ElasticOutput {
        image,
        landmarks,
        fields,
    })
}

/// Step four: `Ĩ(x̃, ỹ) = I(x̃ + dx(x̃, ỹ), ỹ + dy(x̃, ỹ))`, with source
/// coordinates clamped to the image.
pub fn apply_fields(img: &Image, fields: &DisplacementFieldPair) -> Result<Image> {
    if fields.width() != img.width() || fields.height() != img.height() {
        return Err(Error::shape(format!(
            "{}x{} field for a {}x{} image",
            fields.width(),
            fields.height(),
            img.width(),
            img.height()
        )));
    }
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let mut data = vec![0.0; w * h * c];
    for y in 0..h {
        for x in 0..w {
            let sx = x as f64 + fields.dx_at(x, y);
            let sy = y as f64 + fields.dy_at(x, y);
            let start = (y * w + x) * c;
            sample_clamped(img, sx, sy, &mut data[start..start + c]);
        }
    }
    Ok(Image::from_raw(w, h, c, data))
}

/// Re-locates every in-frame landmark; out-of-frame ones pass through.
pub fn warp_landmarks(fields: &DisplacementFieldPair, lms: &LandmarkSet, n: usize) -> LandmarkSet {
    lms.map(|_, lm| {
        if lm.visibility.in_frame() {
            invert_landmark(fields, lm, n)
        } else {
            *lm
        }
    })
}
