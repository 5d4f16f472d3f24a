use ndarray::{Array1, Array2, Array3, Axis, Zip};

use crate::{Error, Result, RngStream};

/// Bottleneck reduction rate of the channel-attention excitation.
pub const DEFAULT_REDUCTION: usize = 16;

/// Bottleneck matrices `W1: (C/r) x C` and `W2: C x (C/r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAttentionWeights {
    w1: Array2<f64>,
    w2: Array2<f64>,
    reduction: usize,
}

impl ChannelAttentionWeights {
    pub fn new(w1: Array2<f64>, w2: Array2<f64>) -> Result<Self> {
        let (hidden, channels) = w1.dim();
        if hidden == 0 || channels % hidden != 0 {
            return Err(Error::shape(format!(
                "W1 is {hidden}x{channels}; hidden width must divide the channel count"
            )));
        }
        if w2.dim() != (channels, hidden) {
            return Err(Error::shape(format!(
                "W2 is {:?}, expected {channels}x{hidden}",
                w2.dim()
            )));
        }
        Ok(Self { w1, w2, reduction: channels / hidden })
    }

    pub fn zeros(channels: usize, reduction: usize) -> Result<Self> {
        Self::check_reduction(channels, reduction)?;
        let hidden = channels / reduction;
        Self::new(Array2::zeros((hidden, channels)), Array2::zeros((channels, hidden)))
    }

    /// Entries drawn uniformly from `[-scale, scale)`.
    pub fn random(
        channels: usize,
        reduction: usize,
        scale: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        Self::check_reduction(channels, reduction)?;
        let hidden = channels / reduction;
        let mut draw = || (rng.unit() * 2.0 - 1.0) * scale;
        let w1 = Array2::from_shape_simple_fn((hidden, channels), &mut draw);
        let w2 = Array2::from_shape_simple_fn((channels, hidden), &mut draw);
        Self::new(w1, w2)
    }

    fn check_reduction(channels: usize, reduction: usize) -> Result<()> {
        if reduction == 0 || channels == 0 || channels % reduction != 0 {
            return Err(Error::InvalidParameter(format!(
                "{channels} channels not divisible by reduction {reduction}"
            )));
        }
        Ok(())
    }

    pub fn w1(&self) -> &Array2<f64> {
        &self.w1
    }

    pub fn w2(&self) -> &Array2<f64> {
        &self.w2
    }

    pub fn reduction(&self) -> usize {
        self.reduction
    }

    pub fn channels(&self) -> usize {
        self.w1.ncols()
    }
}

/// 1x1 convolution: per-pixel `weight · v + bias` over the channel axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    weight: Array2<f64>,
    bias: Array1<f64>,
}

impl Refinement {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        let (out, inp) = weight.dim();
        if out != inp || bias.len() != out {
            return Err(Error::shape(format!(
                "mixing matrix {out}x{inp} with bias of length {}",
                bias.len()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn identity(channels: usize) -> Self {
        Self { weight: Array2::eye(channels), bias: Array1::zeros(channels) }
    }

    pub fn random(channels: usize, scale: f64, rng: &mut RngStream) -> Self {
        let mut draw = || (rng.unit() * 2.0 - 1.0) * scale;
        let weight = Array2::from_shape_simple_fn((channels, channels), &mut draw);
        let bias = Array1::from_shape_simple_fn(channels, &mut draw);
        Self { weight, bias }
    }

    pub fn weight(&self) -> &Array2<f64> {
        &self.weight
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }
}

/// Per-channel spatial mean of an `(h, w, C)` map.
pub fn channel_squeeze(features: &Array3<f64>) -> Array1<f64> {
    let (h, w, c) = features.dim();
    if h * w == 0 {
        return Array1::zeros(c);
    }
    features.sum_axis(Axis(0)).sum_axis(Axis(0)) / (h * w) as f64
}

/// `sigmoid(W2 · relu(W1 · s))`.
pub fn channel_excite(s: &Array1<f64>, w: &ChannelAttentionWeights) -> Result<Array1<f64>> {
    if s.len() != w.channels() {
        return Err(Error::shape(format!(
            "descriptor has {} channels, weights expect {}",
            s.len(),
            w.channels()
        )));
    }
    let hidden = w.w1.dot(s).mapv(|v| v.max(0.0));
    Ok(w.w2.dot(&hidden).mapv(sigmoid))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `tanh(M · ((A_L + A_C) ⊙ A_ch) + b)` per pixel, with `A_L` broadcast over
/// channels.
pub fn factorize_attention(
    landmark: &Array2<f64>,
    category: &Array3<f64>,
    channel: &Array1<f64>,
    refine: &Refinement,
) -> Result<Array3<f64>> {
    let (h, w, c) = category.dim();
    if landmark.dim() != (h, w) {
        return Err(Error::shape(format!(
            "landmark attention {:?} vs category attention {h}x{w}",
            landmark.dim()
        )));
    }
    if channel.len() != c || refine.bias.len() != c {
        return Err(Error::shape(format!(
            "{c} attention channels, {} channel weights, {}-channel mixer",
            channel.len(),
            refine.bias.len()
        )));
    }
    let mut out = Array3::zeros((h, w, c));
    let mut mixed = Array1::zeros(c);
    for y in 0..h {
        for x in 0..w {
            mixed.assign(&category.slice(ndarray::s![y, x, ..]));
            mixed += landmark[[y, x]];
            mixed *= channel;
            let refined = refine.weight.dot(&mixed) + &refine.bias;
            out.slice_mut(ndarray::s![y, x, ..]).assign(&refined.mapv(f64::tanh));
        }
    }
    Ok(out)
}

/// `(1 + A) ⊙ F`.
pub fn modulate_features(features: &Array3<f64>, attention: &Array3<f64>) -> Result<Array3<f64>> {
    if features.dim() != attention.dim() {
        return Err(Error::shape(format!(
            "features {:?} vs attention {:?}",
            features.dim(),
            attention.dim()
        )));
    }
    Ok(Zip::from(features).and(attention).map_collect(|f, a| (1.0 + a) * f))
}
