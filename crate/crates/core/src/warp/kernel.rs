use crate::{Error, Result};

/// Kernel half-width in multiples of sigma.
pub const DEFAULT_TRUNCATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Center weight is exactly 1; a single impulse keeps its amplitude.
    UnitPeak,
    UnitSum,
}

/// Square 2D Gaussian `exp(-(u² + v²) / (2σ²))` on `[-radius, radius]²`.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    sigma: f64,
    radius: usize,
    normalization: Normalization,
    weights: Vec<f64>,
}

pub fn gaussian_kernel(
    sigma: f64,
    truncation: f64,
    normalization: Normalization,
) -> Result<GaussianKernel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    if !(truncation > 0.0) || !truncation.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "truncation must be > 0, got {truncation}"
        )));
    }
    let radius = (truncation * sigma).ceil() as usize;
    let side = 2 * radius + 1;
    let denom = 2.0 * sigma * sigma;
    let r = radius as i64;
    let mut weights = Vec::with_capacity(side * side);
    for v in -r..=r {
        for u in -r..=r {
            let d2 = (u * u + v * v) as f64;
            weights.push((-d2 / denom).exp());
        }
    }
    if normalization == Normalization::UnitSum {
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
    }
    Ok(GaussianKernel {
        sigma,
        radius,
        normalization,
        weights,
    })
}

impl GaussianKernel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Row-major `(2r+1)²` weights, row index = v + r.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(u, v)`; zero outside the support.
    pub fn weight(&self, u: i64, v: i64) -> f64 {
        let r = self.radius as i64;
        if u.abs() > r || v.abs() > r {
            return 0.0;
        }
        self.weights[((v + r) as usize) * self.side() + (u + r) as usize]
    }
}
