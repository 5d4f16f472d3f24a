//! Landmark / category evaluation of a prediction record file against ground truth.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use garment_augkit::dataio::record::{parse_records, Record};
use garment_augkit::dataio::{mask_categories, CategoryMap};
use garment_augkit::metrics::{build_report, EvalReport, EvalSample};
use garment_augkit::CategoryDistribution;

/// Restriction of the prediction vocabulary, optionally mapping ground-truth
/// names onto sets of prediction names.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub allowed: BTreeSet<String>,
    pub map: CategoryMap,
}

impl Mask {
    /// The bundled CTU → DeepFashion mapping.
    pub fn ctu() -> Self {
        let map = CategoryMap::ctu_to_deepfashion();
        Self { allowed: map.targets(), map }
    }

    /// One entry per line: `Name` allows a prediction name as-is;
    /// `source = A, B` also maps ground-truth `source` to `{A, B}`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut allowed = BTreeSet::new();
        let mut map = CategoryMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((src, targets)) => {
                    let t: Vec<String> = targets
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                    if t.is_empty() {
                        bail!("mask line {}: `{}` maps to nothing", i + 1, src.trim());
                    }
                    allowed.extend(t.iter().cloned());
                    map.insert(src.trim(), t);
                }
                None => {
                    allowed.insert(line.to_string());
                }
            }
        }
        if allowed.is_empty() {
            bail!("mask allows no categories");
        }
        Ok(Self { allowed, map })
    }

    /// `ctu` selects the bundled table, anything else is read as a file.
    pub fn load(source: &str) -> Result<Self> {
        if source == "ctu" {
            return Ok(Self::ctu());
        }
        let text = std::fs::read_to_string(source).with_context(|| format!("reading mask {source}"))?;
        Self::parse(&text)
    }

    /// Prediction names that count as a correct answer for `truth`.
    pub fn accepted(&self, truth: &str) -> Vec<String> {
        match self.map.get(truth) {
            Some(set) => set.iter().cloned().collect(),
            None => vec![truth.to_string()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: EvalReport,
    /// Paths present in only one of the two files.
    pub unmatched: Vec<String>,
}

fn distribution(rec: &Record) -> Result<Option<CategoryDistribution>> {
    let Some(scores) = &rec.scores else { return Ok(None) };
    let names: Arc<[String]> = scores.iter().map(|(n, _)| n.clone()).collect();
    let p = scores.iter().map(|(_, p)| *p).collect();
    CategoryDistribution::new(names, p)
        .map(Some)
        .with_context(|| format!("scores for `{}`", rec.sample.path))
}

pub fn evaluate(
    preds: &[Record],
    gts: &[Record],
    k_list: &[usize],
    mask: Option<&Mask>,
) -> Result<EvalOutcome> {
    let by_path: HashMap<&str, &Record> = preds.iter().map(|r| (r.sample.path.as_str(), r)).collect();
    let gt_paths: BTreeSet<&str> = gts.iter().map(|r| r.sample.path.as_str()).collect();
    let mut unmatched: Vec<String> = preds
        .iter()
        .map(|r| r.sample.path.as_str())
        .filter(|p| !gt_paths.contains(p))
        .map(str::to_string)
        .collect();
    let mut samples = Vec::new();
    for gt in gts {
        let Some(pred) = by_path.get(gt.sample.path.as_str()) else {
            unmatched.push(gt.sample.path.clone());
            continue;
        };
        let (w, h) = gt
            .size
            .or(pred.size)
            .ok_or_else(|| anyhow!("no image size for `{}`", gt.sample.path))?;
        let mut prediction = distribution(pred)?;
        let mut accepted = Vec::new();
        if let (Some(m), Some(d)) = (mask, prediction.as_ref()) {
            // names the model cannot predict carry no mass to keep
            let allowed: Vec<&String> = m.allowed.iter().filter(|n| d.index_of(n).is_some()).collect();
            prediction = Some(
                mask_categories(d, &allowed)
                    .with_context(|| format!("masking `{}`", gt.sample.path))?,
            );
        }
        if let (Some(m), Some(c)) = (mask, gt.sample.category.as_deref()) {
            accepted = m.accepted(c);
        }
        samples.push(EvalSample {
            pred_landmarks: pred.sample.landmarks,
            gt_landmarks: gt.sample.landmarks,
            width: w,
            height: h,
            prediction,
            category: gt.sample.category.clone(),
            accepted,
        });
    }
    let report = build_report(&samples, k_list)?;
    Ok(EvalOutcome { report, unmatched })
}

pub fn cmd_eval(pred: &Path, gt: &Path, k_list: &[usize], mask: Option<&Mask>) -> Result<EvalOutcome> {
    let read = |p: &Path| -> Result<Vec<Record>> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        parse_records(&text).with_context(|| format!("parsing {}", p.display()))
    };
    evaluate(&read(pred)?, &read(gt)?, k_list, mask)
}
