use ndarray::{s, Array2, Array3, Array4, Array5, ArrayView2, Axis};

use crate::{Error, Result, RngStream};

/// Orientation channels per filter; quarter turns keep kernel rotation an
/// exact index permutation.
pub const ORIENTATIONS: usize = 4;

/// Feature map whose channels come in groups of `N` orientation copies,
/// indexed `[[row, col, group, orientation]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedTensor {
    data: Array4<f64>,
}

impl OrientedTensor {
    pub fn new(data: Array4<f64>) -> Result<Self> {
        if data.dim().3 == 0 {
            return Err(Error::shape("no orientation channels"));
        }
        Ok(Self { data })
    }

    /// Splits `C` channels into `C / n` groups; channel `g * n + o` becomes
    /// group `g`, orientation `o`.
    pub fn from_feature_map(map: &Array3<f64>, orientations: usize) -> Result<Self> {
        let (h, w, c) = map.dim();
        if orientations == 0 || c % orientations != 0 {
            return Err(Error::shape(format!(
                "{c} channels do not split into {orientations} orientations"
            )));
        }
        let data = map
            .to_owned()
            .into_shape_with_order((h, w, c / orientations, orientations))
            .map_err(|e| Error::shape(e.to_string()))?;
        Self::new(data)
    }

    pub fn random(
        height: usize,
        width: usize,
        groups: usize,
        orientations: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let data = Array4::from_shape_simple_fn((height, width, groups, orientations), || {
            rng.unit() * 2.0 - 1.0
        });
        Self::new(data)
    }

    pub fn to_feature_map(&self) -> Array3<f64> {
        let (h, w, g, n) = self.data.dim();
        self.data
            .as_standard_layout()
            .to_owned()
            .into_shape_with_order((h, w, g * n))
            .expect("contiguous reshape")
    }

    pub fn data(&self) -> &Array4<f64> {
        &self.data
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn groups(&self) -> usize {
        self.data.dim().2
    }

    pub fn orientations(&self) -> usize {
        self.data.dim().3
    }

    /// Quarter turn of the input: every plane rotated 90° counter-clockwise
    /// and orientation `o` moved to `o + 1 (mod N)`.
    pub fn rot90(&self) -> Self {
        let (h, w, g, n) = self.data.dim();
        let data = Array4::from_shape_fn((w, h, g, n), |(r, c, gi, o)| {
            self.data[[c, w - 1 - r, gi, (o + n - 1) % n]]
        });
        Self { data }
    }

    /// Orientation `o` replaced by orientation `o + shift (mod N)` in every group.
    pub fn shift_orientations(&self, shift: usize) -> Self {
        let n = self.orientations();
        let data = Array4::from_shape_fn(self.data.dim(), |(r, c, g, o)| {
            self.data[[r, c, g, (o + shift) % n]]
        });
        Self { data }
    }

    /// Global average pool: `[[group, orientation]]`.
    pub fn pooled(&self) -> Array2<f64> {
        let area = (self.height() * self.width()) as f64;
        self.data.sum_axis(Axis(0)).sum_axis(Axis(0)) / area
    }
}

/// `j` counter-clockwise quarter turns of a square kernel.
pub fn rotate_kernel(kernel: ArrayView2<f64>, j: usize) -> Array2<f64> {
    let mut out = kernel.to_owned();
    for _ in 0..j % 4 {
        let k = out.ncols();
        let prev = out;
        out = Array2::from_shape_fn((prev.ncols(), prev.nrows()), |(r, c)| prev[[c, k - 1 - r]]);
    }
    out
}

/// Active rotating filter bank `[[out, in, orientation, row, col]]`.
///
/// Only the materialized filter is stored; copy `j` is derived on demand by
/// turning every spatial slice `j` quarter turns and cycling the orientation
/// axis by `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingFilterBank {
    weights: Array5<f64>,
}

impl RotatingFilterBank {
    pub fn new(weights: Array5<f64>) -> Result<Self> {
        let (_, _, n, kh, kw) = weights.dim();
        if n != ORIENTATIONS {
            return Err(Error::UnsupportedOrientationCount(n));
        }
        if kh != kw || kh % 2 == 0 {
            return Err(Error::shape(format!(
                "kernels must be square with odd size, got {kh}x{kw}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn random(
        outputs: usize,
        inputs: usize,
        kernel: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let w = Array5::from_shape_simple_fn((outputs, inputs, ORIENTATIONS, kernel, kernel), || {
            rng.unit() * 2.0 - 1.0
        });
        Self::new(w)
    }

    pub fn weights(&self) -> &Array5<f64> {
        &self.weights
    }

    pub fn outputs(&self) -> usize {
        self.weights.dim().0
    }

    pub fn inputs(&self) -> usize {
        self.weights.dim().1
    }

    pub fn kernel_size(&self) -> usize {
        self.weights.dim().3
    }

    /// Rotated copy `j`: `W_j[o, i, n] = rot^j(W[o, i, n - j mod N])`.
    pub fn rotated(&self, j: usize) -> Self {
        let n = ORIENTATIONS;
        let mut out = self.weights.clone();
        let (no, ni, _, _, _) = self.weights.dim();
        for o in 0..no {
            for i in 0..ni {
                for m in 0..n {
                    let src = self.weights.slice(s![o, i, (m + n - j % n) % n, .., ..]);
                    out.slice_mut(s![o, i, m, .., ..]).assign(&rotate_kernel(src, j));
                }
            }
        }
        Self { weights: out }
    }
}

/// The `j`-th rotated copy of `bank`.
pub fn arf_expand(bank: &RotatingFilterBank, j: usize) -> Result<RotatingFilterBank> {
    if j >= ORIENTATIONS {
        return Err(Error::InvalidParameter(format!(
            "orientation index {j} out of 0..{ORIENTATIONS}"
        )));
    }
    Ok(bank.rotated(j))
}

/// Oriented convolution with same padding.
///
/// `Y[r, c, o, j] = Σ_i Σ_n Σ_{u,v} W_j[o, i, n, u, v] · X[r + u - p, c + v - p, i, n]`
/// where `W_j` is the `j`-th rotated copy and `p = k / 2`. Rotating the input
/// a quarter turn rotates the output a quarter turn and cycles its
/// orientations by one.
pub fn orconv_forward(input: &OrientedTensor, bank: &RotatingFilterBank) -> Result<OrientedTensor> {
    if input.orientations() != ORIENTATIONS {
        return Err(Error::UnsupportedOrientationCount(input.orientations()));
    }
    if input.groups() != bank.inputs() {
        return Err(Error::shape(format!(
            "input has {} groups, bank expects {}",
            input.groups(),
            bank.inputs()
        )));
    }
    let (h, w, ni, n) = input.data.dim();
    let no = bank.outputs();
    let k = bank.kernel_size();
    let p = (k / 2) as isize;
    let copies: Vec<Array5<f64>> = (0..n).map(|j| bank.rotated(j).weights).collect();
    let x = &input.data;
    let mut out = Array4::<f64>::zeros((h, w, no, n));
    for (j, wj) in copies.iter().enumerate() {
        for r in 0..h {
            for c in 0..w {
                for o in 0..no {
                    let mut acc = 0.0;
                    for u in 0..k {
                        let rr = r as isize + u as isize - p;
                        if rr < 0 || rr >= h as isize {
                            continue;
                        }
                        for v in 0..k {
                            let cc = c as isize + v as isize - p;
                            if cc < 0 || cc >= w as isize {
                                continue;
                            }
                            let (rr, cc) = (rr as usize, cc as usize);
                            for i in 0..ni {
                                for m in 0..n {
                                    acc += wj[[o, i, m, u, v]] * x[[rr, cc, i, m]];
                                }
                            }
                        }
                    }
                    out[[r, c, o, j]] = acc;
                }
            }
        }
    }
    OrientedTensor::new(out)
}

/// Squeeze-and-align: per group, global average pooling per orientation, the
/// largest pooled response (lowest index on ties) becomes the main
/// orientation, and the group's orientations are cycled so it comes first.
///
/// Returns the aligned tensor and each group's main orientation index; use
/// [`OrientedTensor::to_feature_map`] for the flat `groups x N` layout.
pub fn s_oralign(input: &OrientedTensor) -> (OrientedTensor, Vec<usize>) {
    let pooled = input.pooled();
    let n = input.orientations();
    let main: Vec<usize> = pooled
        .outer_iter()
        .map(|row| {
            let mut best = 0;
            for (o, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = o;
                }
            }
            best
        })
        .collect();
    let data = Array4::from_shape_fn(input.data.dim(), |(r, c, g, o)| {
        input.data[[r, c, g, (o + main[g]) % n]]
    });
    (OrientedTensor { data }, main)
}
