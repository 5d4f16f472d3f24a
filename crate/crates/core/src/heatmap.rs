//! Landmark heatmaps: Gaussian targets, argmax decoding, the summed squared
//! error loss and the pooled landmark attention map.

use ndarray::Array2;

use crate::{Error, Landmark, LandmarkSet, LandmarkSlot, Result, RngStream, NUM_LANDMARKS};

/// Ground-truth Gaussian width at 224x224.
pub const DEFAULT_SIGMA: f64 = 8.0;
/// Planes whose maximum is below this decode to "no landmark".
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-3;
/// Heatmap-to-feature-map downsampling factor (224 -> 28).
pub const ATTENTION_FACTOR: usize = 8;

/// One `[0, 1]` plane per landmark slot, indexed `[[y, x]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStack {
    planes: Vec<Array2<f64>>,
}

impl HeatmapStack {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            planes: vec![Array2::zeros((height, width)); NUM_LANDMARKS],
        }
    }

    pub fn from_planes(planes: Vec<Array2<f64>>) -> Result<Self> {
        if planes.len() != NUM_LANDMARKS {
            return Err(Error::shape(format!(
                "{} planes, expected {NUM_LANDMARKS}",
                planes.len()
            )));
        }
        let dim = planes[0].dim();
        if dim.0 == 0 || dim.1 == 0 {
            return Err(Error::shape("empty heatmap plane"));
        }
        if planes.iter().any(|p| p.dim() != dim) {
            return Err(Error::shape("heatmap planes differ in size"));
        }
        if planes.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("heatmap value outside [0, 1]".into()));
        }
        Ok(Self { planes })
    }

    pub fn width(&self) -> usize {
        self.planes[0].ncols()
    }

    pub fn height(&self) -> usize {
        self.planes[0].nrows()
    }

    pub fn plane(&self, slot: LandmarkSlot) -> &Array2<f64> {
        &self.planes[slot.index()]
    }

    pub fn planes(&self) -> &[Array2<f64>] {
        &self.planes
    }
}

/// Plane `k` is `exp(-((x - x_k)² + (y - y_k)²) / (2σ²))`, peak 1 at the
/// landmark. Absent and out-of-frame landmarks leave their plane at zero.
pub fn encode_heatmaps(lms: &LandmarkSet, width: usize, height: usize, sigma: f64) -> Result<HeatmapStack> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("heatmap sigma must be > 0, got {sigma}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::shape("empty heatmap"));
    }
    let mut stack = HeatmapStack::zeros(width, height);
    let denom = 2.0 * sigma * sigma;
    for (slot, lm) in lms.iter() {
        if !lm.visibility.in_frame() {
            continue;
        }
        let plane = &mut stack.planes[slot.index()];
        for ((y, x), v) in plane.indexed_iter_mut() {
            let (dx, dy) = (x as f64 - lm.x, y as f64 - lm.y);
            *v = (-(dx * dx + dy * dy) / denom).exp().clamp(0.0, 1.0);
        }
    }
    Ok(stack)
}

/// Argmax of every plane. Several maximal pixels are resolved uniformly at
/// random with `rng`; a plane peaking below `zero_threshold` yields no
/// landmark. Decoded landmarks are visible.
pub fn decode_heatmaps(hm: &HeatmapStack, rng: &mut RngStream, zero_threshold: f64) -> LandmarkSet {
    let mut out = LandmarkSet::empty();
    for slot in LandmarkSlot::ALL {
        let plane = hm.plane(slot);
        let max = plane.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max >= zero_threshold) {
            continue;
        }
        let ties: Vec<(usize, usize)> = plane
            .indexed_iter()
            .filter(|(_, v)| **v == max)
            .map(|(idx, _)| idx)
            .collect();
        let (y, x) = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.index(ties.len() as u64) as usize]
        };
        out.set(slot, Some(Landmark::visible(x as f64, y as f64)));
    }
    out
}

/// `Σ_i Σ_k Σ_x Σ_y (M - M̂)²` over the whole batch; a plain sum, not a mean.
pub fn heatmap_loss(pred: &[HeatmapStack], gt: &[HeatmapStack]) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::shape(format!(
            "batch sizes {} and {}",
            pred.len(),
            gt.len()
        )));
    }
    let mut total = 0.0;
    for (p, g) in pred.iter().zip(gt) {
        if p.planes[0].dim() != g.planes[0].dim() {
            return Err(Error::shape("heatmap sizes differ"));
        }
        for (pp, gp) in p.planes.iter().zip(&g.planes) {
            total += pp
                .iter()
                .zip(gp.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    Ok(total)
}

/// Average-pools each plane over `factor x factor` blocks, then takes the
/// per-pixel maximum across planes: a `(h/factor) x (w/factor)` map in `[0, 1]`.
pub fn landmark_attention(pred: &HeatmapStack, factor: usize) -> Result<Array2<f64>> {
    let (h, w) = (pred.height(), pred.width());
    if factor == 0 || h % factor != 0 || w % factor != 0 {
        return Err(Error::shape(format!(
            "{w}x{h} heatmaps are not divisible by {factor}"
        )));
    }
    let (oh, ow) = (h / factor, w / factor);
    let area = (factor * factor) as f64;
    let mut out = Array2::from_elem((oh, ow), f64::NEG_INFINITY);
    for plane in &pred.planes {
        for by in 0..oh {
            for bx in 0..ow {
                let block = plane.slice(ndarray::s![
                    by * factor..(by + 1) * factor,
                    bx * factor..(bx + 1) * factor
                ]);
                let mean = block.sum() / area;
                let cell = &mut out[[by, bx]];
                *cell = cell.max(mean);
            }
        }
    }
    out.mapv_inplace(|v| v.clamp(0.0, 1.0));
    Ok(out)
}
