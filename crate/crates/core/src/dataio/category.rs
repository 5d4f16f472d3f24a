use std::collections::{BTreeMap, BTreeSet};

use crate::{CategoryDistribution, Error, Result};

/// Source category name to the set of target names it may be predicted as.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CategoryMap {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl CategoryMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<I, S>(&mut self, source: impl Into<String>, targets: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.entries
            .insert(source.into(), targets.into_iter().map(Into::into).collect());
    }

    /// CTU garment names to DeepFashion categories. CTU `towel` has no
    /// counterpart and is deliberately absent.
    pub fn ctu_to_deepfashion() -> Self {
        let mut m = Self::new();
        m.insert("bluse", ["Blouse"]);
        m.insert("hoody", ["Hoodie", "Sweater"]);
        m.insert("pants", ["Jeans", "Jeggins", "Joggers", "Leggins"]);
        m.insert("polo", ["Tee", "Button-Down"]);
        m.insert("polo-long", ["Button-Down", "Henley", "Jacket"]);
        m.insert("skirt", ["Skirt"]);
        m.insert("tshirt", ["Tee"]);
        m.insert("tshirt-long", ["Cardigan", "Sweater", "Tee"]);
        m
    }

    pub fn get(&self, source: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(source)
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Every target name reachable from some source.
    pub fn targets(&self) -> BTreeSet<String> {
        self.entries.values().flatten().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn map_category<'a>(source: &str, map: &'a CategoryMap) -> Result<&'a BTreeSet<String>> {
    map.get(source)
        .ok_or_else(|| Error::UnknownCategory(source.to_string()))
}

/// Zeroes every category outside `allowed` and renormalizes the rest.
pub fn mask_categories<S: AsRef<str>>(
    dist: &CategoryDistribution,
    allowed: &[S],
) -> Result<CategoryDistribution> {
    let mut keep = vec![false; dist.len()];
    for name in allowed {
        let idx = dist
            .index_of(name.as_ref())
            .ok_or_else(|| Error::UnknownCategory(name.as_ref().to_string()))?;
        keep[idx] = true;
    }
    let mass: f64 = dist
        .probabilities()
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| p)
        .sum();
    if mass <= 0.0 {
        return Err(Error::DegenerateMask);
    }
    let probs = dist
        .probabilities()
        .iter()
        .zip(&keep)
        .map(|(p, k)| if *k { p / mass } else { 0.0 })
        .collect();
    CategoryDistribution::new(dist.names().clone(), probs)
}
