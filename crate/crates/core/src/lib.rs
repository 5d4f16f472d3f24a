//! Garment image augmentation and landmark tooling.
//!
//! The crate covers the data side of a fashion landmark / category pipeline:
//!
//! - [`warp`]: bilinear sampling, Gaussian smoothing, rotation and elastic warping.
//! - [`lmmap`]: re-locating landmarks inside an elastically warped image.
//! - [`heatmap`]: Gaussian heatmap targets, argmax decoding, loss and the
//!   landmark spatial attention map.
//! - [`orient`]: forward math for active rotating filters, orientation
//!   alignment, channel attention and attention factorization.
//! - [`dataio`]: annotation parsers/serializers, PNG I/O, crop/resize and
//!   category taxonomy mapping.
//! - [`metrics`]: normalized landmark error and top-k accuracy.
//!
//! Coordinates are 0-indexed everywhere inside the crate: `x` is the column,
//! `y` the row, and integer values sit on pixel centers. Annotation files are
//! 1-indexed and converted at the parse/serialize boundary.

pub mod dataio;
mod error;
pub mod heatmap;
mod image;
mod landmark;
pub mod lmmap;
pub mod metrics;
pub mod orient;
pub mod rng;
pub mod warp;

pub use crate::error::{Error, Result};
pub use crate::image::Image;
pub use crate::landmark::{
    CategoryDistribution, Landmark, LandmarkSet, LandmarkSlot, Visibility, NUM_LANDMARKS,
};
pub use crate::rng::RngStream;
