use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

pub const NUM_LANDMARKS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LandmarkSlot {
    LeftCollar,
    RightCollar,
    LeftSleeve,
    RightSleeve,
    LeftWaistline,
    RightWaistline,
    LeftHem,
    RightHem,
}

impl LandmarkSlot {
    pub const ALL: [LandmarkSlot; NUM_LANDMARKS] = [
        LandmarkSlot::LeftCollar,
        LandmarkSlot::RightCollar,
        LandmarkSlot::LeftSleeve,
        LandmarkSlot::RightSleeve,
        LandmarkSlot::LeftWaistline,
        LandmarkSlot::RightWaistline,
        LandmarkSlot::LeftHem,
        LandmarkSlot::RightHem,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column title used in result tables.
    pub fn name(self) -> &'static str {
        match self {
            LandmarkSlot::LeftCollar => "L.Collar",
            LandmarkSlot::RightCollar => "R.Collar",
            LandmarkSlot::LeftSleeve => "L.Sleeve",
            LandmarkSlot::RightSleeve => "R.Sleeve",
            LandmarkSlot::LeftWaistline => "L.Waistline",
            LandmarkSlot::RightWaistline => "R.Waistline",
            LandmarkSlot::LeftHem => "L.Hem",
            LandmarkSlot::RightHem => "R.Hem",
        }
    }

    /// Identifier used as a field key in record files.
    pub fn key(self) -> &'static str {
        match self {
            LandmarkSlot::LeftCollar => "l_collar",
            LandmarkSlot::RightCollar => "r_collar",
            LandmarkSlot::LeftSleeve => "l_sleeve",
            LandmarkSlot::RightSleeve => "r_sleeve",
            LandmarkSlot::LeftWaistline => "l_waistline",
            LandmarkSlot::RightWaistline => "r_waistline",
            LandmarkSlot::LeftHem => "l_hem",
            LandmarkSlot::RightHem => "r_hem",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.key() == key)
    }
}

impl fmt::Display for LandmarkSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Visibility {
    Visible,
    Occluded,
    OutOfFrame,
}

impl Visibility {
    pub fn code(self) -> u8 {
        match self {
            Visibility::Visible => 0,
            Visibility::Occluded => 1,
            Visibility::OutOfFrame => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Visibility::Visible),
            1 => Some(Visibility::Occluded),
            2 => Some(Visibility::OutOfFrame),
            _ => None,
        }
    }

    /// Visible or occluded: the point lies on the canvas.
    pub fn in_frame(self) -> bool {
        self != Visibility::OutOfFrame
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    pub visibility: Visibility,
}

impl Landmark {
    pub fn new(x: f64, y: f64, visibility: Visibility) -> Self {
        Self { x, y, visibility }
    }

    pub fn visible(x: f64, y: f64) -> Self {
        Self::new(x, y, Visibility::Visible)
    }

    pub fn in_bounds(&self, width: usize, height: usize) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.x < width as f64 && self.y < height as f64
    }

    /// Same coordinates, flagged out-of-frame unless they lie on the canvas.
    pub fn with_bounds(self, width: usize, height: usize) -> Self {
        if self.visibility.in_frame() && !self.in_bounds(width, height) {
            Self {
                visibility: Visibility::OutOfFrame,
                ..self
            }
        } else {
            self
        }
    }
}

/// The eight garment landmarks; slots a garment does not have stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LandmarkSet {
    slots: [Option<Landmark>; NUM_LANDMARKS],
}

impl LandmarkSet {
    pub fn new(slots: [Option<Landmark>; NUM_LANDMARKS]) -> Self {
        Self { slots }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn get(&self, slot: LandmarkSlot) -> Option<&Landmark> {
        self.slots[slot.index()].as_ref()
    }

    pub fn set(&mut self, slot: LandmarkSlot, lm: Option<Landmark>) {
        self.slots[slot.index()] = lm;
    }

    pub fn with(mut self, slot: LandmarkSlot, lm: Landmark) -> Self {
        self.set(slot, Some(lm));
        self
    }

    pub fn slots(&self) -> &[Option<Landmark>; NUM_LANDMARKS] {
        &self.slots
    }

    pub fn iter(&self) -> impl Iterator<Item = (LandmarkSlot, &Landmark)> {
        LandmarkSlot::ALL
            .into_iter()
            .zip(self.slots.iter())
            .filter_map(|(s, l)| l.as_ref().map(|l| (s, l)))
    }

    pub fn present_count(&self) -> usize {
        self.slots.iter().flatten().count()
    }

    /// Applies `f` to every present landmark.
    pub fn map(&self, mut f: impl FnMut(LandmarkSlot, &Landmark) -> Landmark) -> Self {
        let mut out = *self;
        for slot in LandmarkSlot::ALL {
            if let Some(lm) = &self.slots[slot.index()] {
                out.slots[slot.index()] = Some(f(slot, lm));
            }
        }
        out
    }

    /// Every visible/occluded landmark lies inside `width x height`.
    pub fn is_consistent(&self, width: usize, height: usize) -> bool {
        self.iter()
            .all(|(_, l)| !l.visibility.in_frame() || l.in_bounds(width, height))
    }
}

/// Probabilities over a named category vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDistribution {
    names: Arc<[String]>,
    probabilities: Vec<f64>,
}

impl CategoryDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(names: Arc<[String]>, probabilities: Vec<f64>) -> Result<Self> {
        if names.len() != probabilities.len() {
            return Err(Error::shape(format!(
                "{} names for {} probabilities",
                names.len(),
                probabilities.len()
            )));
        }
        if names.is_empty() {
            return Err(Error::shape("empty category vocabulary"));
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("probabilities sum to {sum}")));
        }
        Ok(Self {
            names,
            probabilities,
        })
    }

    /// All mass on `name`.
    pub fn one_hot(names: Arc<[String]>, name: &str) -> Result<Self> {
        let idx = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownCategory(name.to_string()))?;
        let mut p = vec![0.0; names.len()];
        p[idx] = 1.0;
        Self::new(names, p)
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn probability(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.probabilities[i])
    }

    /// Index of the highest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = i;
            }
        }
        best
    }

    /// 0-based rank of category `idx`: entries with higher probability, plus
    /// equal-probability entries with a lower index, come first.
    pub fn rank_of(&self, idx: usize) -> usize {
        let p = self.probabilities[idx];
        self.probabilities
            .iter()
            .enumerate()
            .filter(|&(j, &q)| q > p || (q == p && j < idx))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(names: &[&str]) -> Arc<[String]> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn slot_order_matches_table_columns() {
        let names: Vec<_> = LandmarkSlot::ALL.iter().map(|s| s.name()).collect();
        assert_eq!(
            names,
            [
                "L.Collar",
                "R.Collar",
                "L.Sleeve",
                "R.Sleeve",
                "L.Waistline",
                "R.Waistline",
                "L.Hem",
                "R.Hem"
            ]
        );
        for s in LandmarkSlot::ALL {
            assert_eq!(LandmarkSlot::from_key(s.key()), Some(s));
        }
    }

    #[test]
    fn bounds_flagging() {
        let lm = Landmark::visible(10.0, 3.0).with_bounds(10, 10);
        assert_eq!(lm.visibility, Visibility::OutOfFrame);
        assert_eq!((lm.x, lm.y), (10.0, 3.0));
        let lm = Landmark::visible(9.5, 3.0).with_bounds(10, 10);
        assert_eq!(lm.visibility, Visibility::Visible);
    }

    #[test]
    fn distribution_validation() {
        let v = vocab(&["a", "b"]);
        assert!(CategoryDistribution::new(v.clone(), vec![0.5, 0.5]).is_ok());
        assert!(CategoryDistribution::new(v.clone(), vec![0.5, 0.6]).is_err());
        assert!(CategoryDistribution::new(v.clone(), vec![1.0]).is_err());
        assert!(CategoryDistribution::new(v, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn rank_breaks_ties_by_index() {
        let d = CategoryDistribution::new(vocab(&["a", "b", "c"]), vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(d.rank_of(1), 0);
        assert_eq!(d.rank_of(0), 1);
        assert_eq!(d.rank_of(2), 2);
        assert_eq!(d.argmax(), 1);
    }
}
