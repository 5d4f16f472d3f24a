//! Landmark re-location through an elastic displacement field.
//!
//! A smoothed field tells each output pixel where it reads from, but has no
//! closed-form inverse. To find where an input landmark `(x_k, y_k)` lands,
//! the `n` output pixels whose source x is closest to `x_k` and the `n`
//! whose source y is closest to `y_k` are collected. A pixel present in both
//! sets is an exact match, found through a hash set. Otherwise the X
//! candidate with the nearest Y candidate (via a kd-tree) is used.
//!
//! [`oracle_invert`] is the exhaustive minimizer the approximation is
//! checked against.

mod kdtree;

use std::cmp::Ordering;
use std::collections::HashMap;

pub use kdtree::KdTree2;

use crate::warp::DisplacementFieldPair;
use crate::{Landmark, Visibility};

/// Candidate count used at 224x224.
pub const BASE_CANDIDATES: usize = 200;
/// Lower bound on the scaled candidate count.
pub const MIN_CANDIDATES: usize = 50;
/// Combined residual (pixels) above which a landmark is declared out of frame.
pub const REJECT_RESIDUAL: f64 = 3.0;

/// Integer pixel position. Ordered row-major: by `y`, then `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    pub x: i64,
    pub y: i64,
}

impl Pixel {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

impl Ord for Pixel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Pixel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `max(50, round(200 · w·h / 224²))`.
pub fn default_candidate_count(width: usize, height: usize) -> usize {
    let scaled = (BASE_CANDIDATES as f64 * (width * height) as f64 / (224.0 * 224.0)).round();
    (scaled as usize).max(MIN_CANDIDATES)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub pixel: Pixel,
    pub residual: f64,
}

/// The `n` output pixels whose source coordinate on one axis is closest to
/// the target, ascending by residual, ties in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    axis: Axis,
    entries: Vec<Candidate>,
}

impl CandidateSet {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn entries(&self) -> &[Candidate] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.entries.iter().map(|c| c.pixel)
    }
}

#[inline]
fn axis_residual(fields: &DisplacementFieldPair, x: usize, y: usize, target: f64, axis: Axis) -> f64 {
    match axis {
        Axis::X => (x as f64 + fields.dx_at(x, y) - target).abs(),
        Axis::Y => (y as f64 + fields.dy_at(x, y) - target).abs(),
    }
}

/// Argmin-n over all pixels of `|x̃ + dx(x̃, ỹ) - x_k|` (or the y analogue).
pub fn candidate_set(fields: &DisplacementFieldPair, target: f64, axis: Axis, n: usize) -> CandidateSet {
    let (w, h) = (fields.width(), fields.height());
    let mut all: Vec<(f64, usize)> = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            all.push((axis_residual(fields, x, y, target, axis), y * w + x));
        }
    }
    let n = n.min(all.len());
    // row-major index order is the (ỹ, x̃) tie-break
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if n > 0 && n < all.len() {
        all.select_nth_unstable_by(n - 1, cmp);
    }
    all.truncate(n);
    all.sort_unstable_by(cmp);
    let entries = all
        .into_iter()
        .map(|(residual, i)| Candidate {
            pixel: Pixel::new((i % w) as i64, (i / w) as i64),
            residual,
        })
        .collect();
    CandidateSet { axis, entries }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMatch {
    pub pixel: Pixel,
    /// X-residual plus Y-residual at `pixel`.
    pub residual_sum: f64,
}

/// A pixel present in both sets, found by hashing `xs` and probing with `ys`.
/// Several shared pixels resolve to the smallest residual sum, then row-major.
pub fn match_exact(xs: &CandidateSet, ys: &CandidateSet) -> Option<ExactMatch> {
    let table: HashMap<Pixel, f64> = xs.entries.iter().map(|c| (c.pixel, c.residual)).collect();
    let mut best: Option<ExactMatch> = None;
    for c in &ys.entries {
        let Some(rx) = table.get(&c.pixel) else {
            continue;
        };
        let cand = ExactMatch {
            pixel: c.pixel,
            residual_sum: rx + c.residual,
        };
        let better = match &best {
            None => true,
            Some(b) => match cand.residual_sum.total_cmp(&b.residual_sum) {
                Ordering::Less => true,
                Ordering::Equal => cand.pixel < b.pixel,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some(cand);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestMatch {
    /// The `xs` member that is returned.
    pub pixel: Pixel,
    /// Its closest `ys` member.
    pub neighbor: Pixel,
    pub distance: f64,
}

/// The `xs` member whose nearest `ys` member is closest, using a kd-tree over
/// `ys`. Ties go to the smaller squared distance, then row-major order of the
/// `xs` member. `None` only when either set is empty.
pub fn match_nearest(xs: &CandidateSet, ys: &CandidateSet) -> Option<NearestMatch> {
    let tree = KdTree2::new(ys.pixels());
    let mut best: Option<(i64, Pixel, Pixel)> = None;
    for p in xs.pixels() {
        let Some((q, d)) = tree.nearest(p) else {
            continue;
        };
        let cand = (d, p, q);
        if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
            best = Some(cand);
        }
    }
    best.map(|(d, pixel, neighbor)| NearestMatch {
        pixel,
        neighbor,
        distance: (d as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMethod {
    /// Zero field: the identity is the exact inverse.
    Identity,
    Exact,
    Nearest,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub landmark: Landmark,
    /// `sqrt(rx² + ry²)` at the returned position.
    pub residual: f64,
    pub method: InversionMethod,
}

/// Combined residual of output pixel `p` for source point `(tx, ty)`.
pub fn combined_residual(fields: &DisplacementFieldPair, p: Pixel, tx: f64, ty: f64) -> f64 {
    let (x, y) = (p.x as usize, p.y as usize);
    let rx = x as f64 + fields.dx_at(x, y) - tx;
    let ry = y as f64 + fields.dy_at(x, y) - ty;
    (rx * rx + ry * ry).sqrt()
}

fn finish(lm: &Landmark, fields: &DisplacementFieldPair, p: Pixel, method: InversionMethod) -> Inversion {
    let residual = combined_residual(fields, p, lm.x, lm.y);
    let visibility = if residual > REJECT_RESIDUAL {
        Visibility::OutOfFrame
    } else {
        lm.visibility
    };
    Inversion {
        landmark: Landmark::new(p.x as f64, p.y as f64, visibility),
        residual,
        method,
    }
}

/// Full inversion record; see [`invert_landmark`].
pub fn invert_landmark_detailed(fields: &DisplacementFieldPair, lm: &Landmark, n: usize) -> Inversion {
    if fields.is_zero() {
        return Inversion {
            landmark: *lm,
            residual: 0.0,
            method: InversionMethod::Identity,
        };
    }
    let xs = candidate_set(fields, lm.x, Axis::X, n);
    let ys = candidate_set(fields, lm.y, Axis::Y, n);
    if let Some(m) = match_exact(&xs, &ys) {
        return finish(lm, fields, m.pixel, InversionMethod::Exact);
    }
    let m = match_nearest(&xs, &ys).expect("candidate sets are never empty for n >= 1");
    finish(lm, fields, m.pixel, InversionMethod::Nearest)
}

/// Position of `lm` in the warped image.
///
/// Visibility is kept unless the best position still misses the landmark by
/// more than [`REJECT_RESIDUAL`] pixels, in which case it becomes out-of-frame.
pub fn invert_landmark(fields: &DisplacementFieldPair, lm: &Landmark, n: usize) -> Landmark {
    invert_landmark_detailed(fields, lm, n.max(1)).landmark
}

/// Exhaustive minimizer of `(x̃ + dx - x_k)² + (ỹ + dy - y_k)²`, ties row-major.
/// Applies the same zero-field identity and reject threshold as
/// [`invert_landmark`].
pub fn oracle_invert(fields: &DisplacementFieldPair, lm: &Landmark) -> Inversion {
    if fields.is_zero() {
        return Inversion {
            landmark: *lm,
            residual: 0.0,
            method: InversionMethod::Identity,
        };
    }
    let mut best = (f64::INFINITY, Pixel::new(0, 0));
    for y in 0..fields.height() {
        for x in 0..fields.width() {
            let rx = x as f64 + fields.dx_at(x, y) - lm.x;
            let ry = y as f64 + fields.dy_at(x, y) - lm.y;
            let d = rx * rx + ry * ry;
            if d < best.0 {
                best = (d, Pixel::new(x as i64, y as i64));
            }
        }
    }
    finish(lm, fields, best.1, InversionMethod::Exhaustive)
}
