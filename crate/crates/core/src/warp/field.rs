use std::collections::HashSet;

use super::kernel::{gaussian_kernel, GaussianKernel, Normalization, DEFAULT_TRUNCATION};
use crate::{Error, Result, RngStream};

/// Elastic warping strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticParams {
    /// Number of seeded displacement impulses.
    pub n_seeds: usize,
    /// Impulse magnitudes are drawn from `U(-alpha, alpha)`, in pixels.
    pub alpha: f64,
    /// Smoothing scale in pixels.
    pub sigma: f64,
}

impl Default for ElasticParams {
    fn default() -> Self {
        Self {
            n_seeds: 3,
            alpha: 500.0,
            sigma: 40.0,
        }
    }
}

impl ElasticParams {
    pub fn new(n_seeds: usize, alpha: f64, sigma: f64) -> Result<Self> {
        let p = Self {
            n_seeds,
            alpha,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Upper bound on any smoothed displacement under unit-peak smoothing.
    pub fn magnitude_bound(&self) -> f64 {
        self.n_seeds as f64 * self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldStage {
    Sparse,
    Smoothed,
}

/// Per-pixel source offsets: output pixel `(x̃, ỹ)` samples the input at
/// `(x̃ + dx, ỹ + dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementFieldPair {
    width: usize,
    height: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
    stage: FieldStage,
}

impl DisplacementFieldPair {
    pub fn new(
        width: usize,
        height: usize,
        dx: Vec<f64>,
        dy: Vec<f64>,
        stage: FieldStage,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::shape(format!("empty field {width}x{height}")));
        }
        let n = width * height;
        if dx.len() != n || dy.len() != n {
            return Err(Error::shape(format!(
                "field lengths {}/{} for {width}x{height}",
                dx.len(),
                dy.len()
            )));
        }
        if dx.iter().chain(dy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite displacement".into()));
        }
        Ok(Self {
            width,
            height,
            dx,
            dy,
            stage,
        })
    }

    pub fn zeros(width: usize, height: usize, stage: FieldStage) -> Result<Self> {
        let n = width * height;
        Self::new(width, height, vec![0.0; n], vec![0.0; n], stage)
    }

    /// Smoothed-stage field with the same offset everywhere.
    pub fn constant(width: usize, height: usize, dx: f64, dy: f64) -> Result<Self> {
        let n = width * height;
        Self::new(
            width,
            height,
            vec![dx; n],
            vec![dy; n],
            FieldStage::Smoothed,
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn stage(&self) -> FieldStage {
        self.stage
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    #[inline]
    pub fn dx_at(&self, x: usize, y: usize) -> f64 {
        self.dx[y * self.width + x]
    }

    #[inline]
    pub fn dy_at(&self, x: usize, y: usize) -> f64 {
        self.dy[y * self.width + x]
    }

    pub fn is_zero(&self) -> bool {
        self.dx.iter().chain(self.dy.iter()).all(|&v| v == 0.0)
    }

    /// `max(|dx|, |dy|)` over the whole field.
    pub fn max_abs(&self) -> f64 {
        self.dx
            .iter()
            .chain(self.dy.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Steps one and two: `n_seeds` distinct pixels drawn uniformly, each given
/// independent `U(-alpha, alpha)` offsets on both axes. All other entries are 0.
pub fn sample_sparse_fields(
    width: usize,
    height: usize,
    params: &ElasticParams,
    rng: &mut RngStream,
) -> Result<DisplacementFieldPair> {
    params.validate()?;
    let total = width * height;
    if params.n_seeds > total {
        return Err(Error::TooManySeeds {
            seeds: params.n_seeds,
            width,
            height,
        });
    }
    let mut field = DisplacementFieldPair::zeros(width, height, FieldStage::Sparse)?;

    // Floyd's sampling without replacement; insertion order fixes draw order.
    let n = total as u64;
    let k = params.n_seeds as u64;
    let mut chosen = HashSet::with_capacity(params.n_seeds);
    let mut order = Vec::with_capacity(params.n_seeds);
    for j in (n - k)..n {
        let t = rng.index(j + 1);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        order.push(pick as usize);
    }
    for idx in order {
        field.dx[idx] = rng.uniform(-params.alpha, params.alpha)?;
        field.dy[idx] = rng.uniform(-params.alpha, params.alpha)?;
    }
    Ok(field)
}

/// Step three: zero-padded convolution of both fields with `kernel`.
///
/// The kernel is symmetric, so the convolution is accumulated by stamping the
/// kernel at every nonzero entry. Cost is `O(nnz * side²)`, which for the
/// sparse impulse fields is far below a dense pass.
pub fn smooth_fields(field: &DisplacementFieldPair, kernel: &GaussianKernel) -> DisplacementFieldPair {
    let (w, h) = (field.width, field.height);
    let r = kernel.radius() as i64;
    let mut dx = vec![0.0; w * h];
    let mut dy = vec![0.0; w * h];
    for sy in 0..h {
        for sx in 0..w {
            let i = sy * w + sx;
            let (vx, vy) = (field.dx[i], field.dy[i]);
            if vx == 0.0 && vy == 0.0 {
                continue;
            }
            let y_lo = (sy as i64 - r).max(0) as usize;
            let y_hi = (sy as i64 + r).min(h as i64 - 1) as usize;
            let x_lo = (sx as i64 - r).max(0) as usize;
            let x_hi = (sx as i64 + r).min(w as i64 - 1) as usize;
            for ty in y_lo..=y_hi {
                let v = ty as i64 - sy as i64;
                for tx in x_lo..=x_hi {
                    let g = kernel.weight(tx as i64 - sx as i64, v);
                    dx[ty * w + tx] += vx * g;
                    dy[ty * w + tx] += vy * g;
                }
            }
        }
    }
    DisplacementFieldPair {
        width: w,
        height: h,
        dx,
        dy,
        stage: FieldStage::Smoothed,
    }
}

/// Steps one to three: sparse impulses smoothed with a unit-peak Gaussian
/// truncated at three sigma.
pub fn make_displacement_fields(
    width: usize,
    height: usize,
    params: &ElasticParams,
    rng: &mut RngStream,
) -> Result<DisplacementFieldPair> {
    if width == 0 || height == 0 {
        return Err(Error::shape(format!("empty field {width}x{height}")));
    }
    let sparse = sample_sparse_fields(width, height, params, rng)?;
    let kernel = gaussian_kernel(params.sigma, DEFAULT_TRUNCATION, Normalization::UnitPeak)?;
    Ok(smooth_fields(&sparse, &kernel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_gives_zero_field() {
        let mut rng = RngStream::new(1, 0);
        let p = ElasticParams::new(3, 0.0, 5.0).unwrap();
        let f = make_displacement_fields(32, 24, &p, &mut rng).unwrap();
        assert!(f.is_zero());
        assert_eq!(f.stage(), FieldStage::Smoothed);
    }

    #[test]
    fn zero_seeds_gives_zero_field() {
        let mut rng = RngStream::new(1, 0);
        let p = ElasticParams::new(0, 500.0, 5.0).unwrap();
        assert!(make_displacement_fields(32, 24, &p, &mut rng).unwrap().is_zero());
    }

    #[test]
    fn sparse_stage_invariants() {
        let mut rng = RngStream::new(9, 4);
        let p = ElasticParams::new(5, 20.0, 3.0).unwrap();
        let f = sample_sparse_fields(8, 8, &p, &mut rng).unwrap();
        assert_eq!(f.stage(), FieldStage::Sparse);
        let nnz = f.dx().iter().filter(|v| **v != 0.0).count();
        assert!(nnz <= 5);
        assert!(f.max_abs() <= 20.0);
    }

    #[test]
    fn seeds_are_distinct_even_when_saturated() {
        let mut rng = RngStream::new(2, 2);
        let p = ElasticParams::new(16, 1.0, 1.0).unwrap();
        let f = sample_sparse_fields(4, 4, &p, &mut rng).unwrap();
        // every pixel drawn exactly once; a zero draw has probability ~0
        assert_eq!(f.dx().iter().filter(|v| **v != 0.0).count(), 16);
    }

    #[test]
    fn too_many_seeds() {
        let mut rng = RngStream::new(0, 0);
        let p = ElasticParams::new(10, 1.0, 1.0).unwrap();
        assert!(matches!(
            make_displacement_fields(3, 3, &p, &mut rng),
            Err(Error::TooManySeeds { .. })
        ));
    }

    #[test]
    fn single_impulse_matches_closed_form() {
        let (w, h) = (24, 20);
        let mut dx = vec![0.0; w * h];
        dx[10 * w + 10] = 100.0;
        let sparse =
            DisplacementFieldPair::new(w, h, dx, vec![0.0; w * h], FieldStage::Sparse).unwrap();
        let kernel = gaussian_kernel(2.0, 3.0, Normalization::UnitPeak).unwrap();
        let s = smooth_fields(&sparse, &kernel);
        for y in 0..h {
            for x in 0..w {
                let (u, v) = (x as f64 - 10.0, y as f64 - 10.0);
                let inside = u.abs() <= 6.0 && v.abs() <= 6.0;
                let expected = if inside {
                    100.0 * (-(u * u + v * v) / 8.0).exp()
                } else {
                    0.0
                };
                assert!((s.dx_at(x, y) - expected).abs() < 1e-12, "({x},{y})");
                assert_eq!(s.dy_at(x, y), 0.0);
            }
        }
    }

    #[test]
    fn magnitude_bound_holds() {
        let mut rng = RngStream::new(77, 1);
        for i in 0..50 {
            let p = ElasticParams::new(1 + i % 5, 10.0 + i as f64, 1.0 + (i % 7) as f64).unwrap();
            let f = make_displacement_fields(40, 30, &p, &mut rng).unwrap();
            assert!(f.max_abs() <= p.magnitude_bound());
        }
    }

    #[test]
    fn deterministic_given_stream() {
        let p = ElasticParams::new(3, 50.0, 4.0).unwrap();
        let a = make_displacement_fields(30, 30, &p, &mut RngStream::new(5, 6)).unwrap();
        let b = make_displacement_fields(30, 30, &p, &mut RngStream::new(5, 6)).unwrap();
        assert_eq!(a, b);
    }
}
