//! Annotation files, PNG I/O, bounding-box crops and category taxonomies.
//!
//! Two textual schemas are supported:
//!
//! - the three-file whitespace layout (`list_landmarks.txt`, `list_bbox.txt`,
//!   `list_category_img.txt`): a count line, a header line, then one row per
//!   image;
//! - a one-record-per-line `key=value` layout for datasets whose annotations
//!   carry everything in a single file (see [`record`]).
//!
//! Landmark coordinates are 1-indexed on disk and 0-indexed in memory.
//! Bounding boxes are stored verbatim as `x1 y1 x2 y2` with `x2`, `y2`
//! exclusive.

mod annotations;
mod category;
mod crop;
mod png;
pub mod record;

use std::fmt;
use std::str::FromStr;

pub use annotations::{
    join_annotations, parse_bbox_file, parse_category_file, parse_landmark_file,
    serialize_bbox_file, serialize_category_file, serialize_landmark_file, Joined, UnmatchedReport,
};
pub use category::{map_category, mask_categories, CategoryMap};
pub use crop::crop_resize;
pub use png::{load_png, save_png};

use crate::{Error, LandmarkSet, LandmarkSlot, Result};

/// Garment coverage; decides which landmark slots a sample carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClothesType {
    Upper,
    Lower,
    Full,
}

impl ClothesType {
    pub fn code(self) -> u8 {
        match self {
            ClothesType::Upper => 1,
            ClothesType::Lower => 2,
            ClothesType::Full => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(ClothesType::Upper),
            2 => Some(ClothesType::Lower),
            3 => Some(ClothesType::Full),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClothesType::Upper => "upper",
            ClothesType::Lower => "lower",
            ClothesType::Full => "full",
        }
    }

    /// Slots annotated for this type, in file column order.
    pub fn slots(self) -> &'static [LandmarkSlot] {
        use LandmarkSlot::*;
        match self {
            ClothesType::Upper => &[LeftCollar, RightCollar, LeftSleeve, RightSleeve, LeftHem, RightHem],
            ClothesType::Lower => &[LeftWaistline, RightWaistline, LeftHem, RightHem],
            ClothesType::Full => &LandmarkSlot::ALL,
        }
    }

    pub fn allows(self, slot: LandmarkSlot) -> bool {
        self.slots().contains(&slot)
    }
}

impl fmt::Display for ClothesType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClothesType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(ClothesType::Upper),
            "lower" => Ok(ClothesType::Lower),
            "full" => Ok(ClothesType::Full),
            _ => Err(Error::InvalidParameter(format!("unknown clothes type `{s}`"))),
        }
    }
}

/// Pixel box `[x1, x2) x [y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bbox {
    pub x1: i64,
    pub y1: i64,
    pub x2: i64,
    pub y2: i64,
}

impl Bbox {
    pub fn new(x1: i64, y1: i64, x2: i64, y2: i64) -> Result<Self> {
        if x1 >= x2 || y1 >= y2 {
            return Err(Error::InvalidBbox { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self { x1: 0, y1: 0, x2: width as i64, y2: height as i64 }
    }

    pub fn width(&self) -> i64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> i64 {
        self.y2 - self.y1
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x1 >= 0 && self.y1 >= 0 && self.x2 <= width as i64 && self.y2 <= height as i64
    }

    fn invalid(&self) -> Error {
        Error::InvalidBbox { x1: self.x1, y1: self.y1, x2: self.x2, y2: self.y2 }
    }
}

/// One garment instance with whatever annotations are known for it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedSample {
    pub path: String,
    pub clothes_type: ClothesType,
    pub bbox: Option<Bbox>,
    pub category: Option<String>,
    pub landmarks: LandmarkSet,
}

impl AnnotatedSample {
    pub fn new(path: impl Into<String>, clothes_type: ClothesType) -> Self {
        Self {
            path: path.into(),
            clothes_type,
            bbox: None,
            category: None,
            landmarks: LandmarkSet::empty(),
        }
    }

    /// True when no slot outside the clothes type is populated.
    pub fn slots_consistent(&self) -> bool {
        self.landmarks.iter().all(|(slot, _)| self.clothes_type.allows(slot))
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn fmt_coord(v: f64) -> String {
    format!("{v}")
}
