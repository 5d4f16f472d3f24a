//! Normalized landmark error and top-k category accuracy.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{CategoryDistribution, Error, LandmarkSet, LandmarkSlot, Result, NUM_LANDMARKS};

/// Error charged for a landmark the ground truth has but the prediction lacks:
/// the diagonal of the unit square.
pub const MISSED_LANDMARK_ERROR: f64 = std::f64::consts::SQRT_2;

/// Per-slot `sqrt((dx/w)^2 + (dy/h)^2)`.
///
/// Slots the ground truth lacks, or marks out-of-frame, are not evaluated
/// (`None`). A slot present in the ground truth but missing or out-of-frame
/// in the prediction scores [`MISSED_LANDMARK_ERROR`].
pub fn normalized_error(
    pred: &LandmarkSet,
    gt: &LandmarkSet,
    width: usize,
    height: usize,
) -> [Option<f64>; NUM_LANDMARKS] {
    let mut out = [None; NUM_LANDMARKS];
    for (slot, g) in gt.iter() {
        if !g.visibility.in_frame() {
            continue;
        }
        out[slot.index()] = Some(match pred.get(slot) {
            Some(p) if p.visibility.in_frame() => {
                let dx = (p.x - g.x) / width as f64;
                let dy = (p.y - g.y) / height as f64;
                dx.hypot(dy)
            }
            _ => MISSED_LANDMARK_ERROR,
        });
    }
    out
}

/// Whether the true category is among the `k` best-ranked entries.
///
/// `truth` may list several acceptable names (a mapped category set); the
/// sample counts as correct when any of them ranks within the top `k`.
pub fn in_top_k<S: AsRef<str>>(pred: &CategoryDistribution, truth: &[S], k: usize) -> bool {
    truth
        .iter()
        .filter_map(|t| pred.index_of(t.as_ref()))
        .any(|idx| pred.rank_of(idx) < k)
}

/// Percentage of samples whose true category ranks in the top `k`; ties at
/// equal probability rank by ascending category index.
pub fn topk_accuracy<S: AsRef<str>>(
    preds: &[CategoryDistribution],
    truths: &[S],
    k: usize,
) -> Result<f64> {
    if preds.len() != truths.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            preds.len(),
            truths.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::EmptyEval);
    }
    if let Some(p) = preds.iter().find(|p| k == 0 || k > p.len()) {
        return Err(Error::InvalidParameter(format!(
            "k = {k} outside 1..={}",
            p.len()
        )));
    }
    let hits = preds
        .iter()
        .zip(truths)
        .filter(|(p, t)| in_top_k(p, &[t.as_ref()], k))
        .count();
    Ok(100.0 * hits as f64 / preds.len() as f64)
}

/// One evaluated image.
#[derive(Debug, Clone)]
pub struct EvalSample {
    pub pred_landmarks: LandmarkSet,
    pub gt_landmarks: LandmarkSet,
    pub width: usize,
    pub height: usize,
    pub prediction: Option<CategoryDistribution>,
    /// Ground-truth category name used for per-category grouping.
    pub category: Option<String>,
    /// Names accepted as correct; defaults to `[category]` when empty.
    pub accepted: Vec<String>,
}

/// Top-k accuracy for one `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopK {
    pub k: usize,
    pub overall: f64,
    pub per_category: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Mean NE per slot; `None` when no instance was evaluated.
    pub per_landmark: [Option<f64>; NUM_LANDMARKS],
    /// Mean of the evaluated per-slot means.
    pub average: Option<f64>,
    pub topk: Vec<TopK>,
    pub samples: usize,
}

impl EvalReport {
    /// Tab-separated table: a header row of the eight landmark names plus
    /// `Avg.`, an `NE` row, then one `top-k` row per requested `k`
    /// (overall, followed by per-category rows).
    pub fn to_tsv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut s = String::from("metric");
        for slot in LandmarkSlot::ALL {
            write!(s, "\t{}", slot.name()).unwrap();
        }
        s.push_str("\tAvg.\n");
        s.push_str("NE");
        for v in self.per_landmark {
            write!(s, "\t{}", fmt(v)).unwrap();
        }
        writeln!(s, "\t{}", fmt(self.average)).unwrap();
        if !self.topk.is_empty() {
            s.push_str("\ncategory");
            for t in &self.topk {
                write!(s, "\ttop-{}", t.k).unwrap();
            }
            s.push_str("\nall");
            for t in &self.topk {
                write!(s, "\t{:.2}", t.overall).unwrap();
            }
            s.push('\n');
            for name in self.topk[0].per_category.keys() {
                s.push_str(name);
                for t in &self.topk {
                    write!(s, "\t{:.2}", t.per_category[name]).unwrap();
                }
                s.push('\n');
            }
        }
        s
    }
}

/// Aggregates landmark errors over all samples and top-k accuracies over the
/// samples carrying both a prediction and a ground-truth category.
pub fn build_report(samples: &[EvalSample], k_list: &[usize]) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyEval);
    }
    let mut sums = [0.0; NUM_LANDMARKS];
    let mut counts = [0usize; NUM_LANDMARKS];
    for s in samples {
        let ne = normalized_error(&s.pred_landmarks, &s.gt_landmarks, s.width, s.height);
        for (i, v) in ne.iter().enumerate() {
            if let Some(v) = v {
                sums[i] += v;
                counts[i] += 1;
            }
        }
    }
    let per_landmark: [Option<f64>; NUM_LANDMARKS] =
        std::array::from_fn(|i| (counts[i] > 0).then(|| sums[i] / counts[i] as f64));
    let evaluated: Vec<f64> = per_landmark.iter().flatten().copied().collect();
    let average = (!evaluated.is_empty()).then(|| evaluated.iter().sum::<f64>() / evaluated.len() as f64);

    let classified: Vec<(&CategoryDistribution, &str, Vec<&str>)> = samples
        .iter()
        .filter_map(|s| {
            let p = s.prediction.as_ref()?;
            let c = s.category.as_deref()?;
            let accepted = if s.accepted.is_empty() {
                vec![c]
            } else {
                s.accepted.iter().map(String::as_str).collect()
            };
            Some((p, c, accepted))
        })
        .collect();
    let mut topk = Vec::new();
    if !classified.is_empty() {
        for &k in k_list {
            if k == 0 {
                return Err(Error::InvalidParameter("k must be at least 1".into()));
            }
            let mut hits = 0usize;
            let mut per: BTreeMap<String, (usize, usize)> = BTreeMap::new();
            for (p, c, accepted) in &classified {
                let hit = in_top_k(p, accepted, k);
                hits += hit as usize;
                let e = per.entry(c.to_string()).or_default();
                e.0 += hit as usize;
                e.1 += 1;
            }
            topk.push(TopK {
                k,
                overall: 100.0 * hits as f64 / classified.len() as f64,
                per_category: per
                    .into_iter()
                    .map(|(c, (h, n))| (c, 100.0 * h as f64 / n as f64))
                    .collect(),
            });
        }
    }
    Ok(EvalReport { per_landmark, average, topk, samples: samples.len() })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::{Landmark, Visibility};

    fn names(n: &[&str]) -> Arc<[String]> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ne_zero_for_identical() {
        let gt = LandmarkSet::empty()
            .with(LandmarkSlot::LeftCollar, Landmark::visible(10.0, 20.0))
            .with(LandmarkSlot::RightHem, Landmark::visible(100.0, 120.0));
        let ne = normalized_error(&gt, &gt, 224, 224);
        assert_eq!(ne.iter().flatten().count(), 2);
        assert!(ne.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn ne_axis_offset() {
        let gt = LandmarkSet::empty().with(LandmarkSlot::LeftSleeve, Landmark::visible(50.0, 50.0));
        let pred = LandmarkSet::empty().with(LandmarkSlot::LeftSleeve, Landmark::visible(72.4, 50.0));
        let ne = normalized_error(&pred, &gt, 224, 224);
        assert!((ne[2].unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ne_missing_and_skipped() {
        let gt = LandmarkSet::empty()
            .with(LandmarkSlot::LeftCollar, Landmark::visible(1.0, 1.0))
            .with(LandmarkSlot::RightCollar, Landmark::new(0.0, 0.0, Visibility::OutOfFrame));
        let pred = LandmarkSet::empty().with(LandmarkSlot::LeftHem, Landmark::visible(3.0, 3.0));
        let ne = normalized_error(&pred, &gt, 10, 10);
        assert_eq!(ne[0], Some(MISSED_LANDMARK_ERROR));
        assert_eq!(ne[1], None);
        assert_eq!(ne[6], None);
    }

    #[test]
    fn topk_hand_fixture() {
        let v = names(&["a", "b", "c", "d"]);
        let preds = vec![
            CategoryDistribution::new(v.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            CategoryDistribution::new(v.clone(), vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
            CategoryDistribution::new(v.clone(), vec![0.5, 0.0, 0.5, 0.0]).unwrap(),
        ];
        // 0-based ranks of the truths: a -> 3, d -> 3 (all tied, highest
        // index), c -> 1 (tied with a, which has the lower index)
        let truths = ["a", "d", "c"];
        assert_eq!(topk_accuracy(&preds, &truths, 1).unwrap(), 0.0);
        assert!((topk_accuracy(&preds, &truths, 2).unwrap() - 100.0 / 3.0).abs() < 1e-12);
        assert!((topk_accuracy(&preds, &truths, 3).unwrap() - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(topk_accuracy(&preds, &truths, 4).unwrap(), 100.0);
        assert!(topk_accuracy(&preds, &truths[..2], 1).is_err());
        assert!(topk_accuracy(&preds, &truths, 5).is_err());
    }

    #[test]
    fn perfect_one_hot() {
        let v = names(&["x", "y", "z"]);
        let preds: Vec<_> = ["x", "z", "y"]
            .iter()
            .map(|n| CategoryDistribution::one_hot(v.clone(), n).unwrap())
            .collect();
        assert_eq!(topk_accuracy(&preds, &["x", "z", "y"], 1).unwrap(), 100.0);
    }

    fn sample(ne_x: f64) -> EvalSample {
        let gt = LandmarkSet::empty().with(LandmarkSlot::LeftHem, Landmark::visible(0.0, 0.0));
        let pred = LandmarkSet::empty().with(LandmarkSlot::LeftHem, Landmark::visible(ne_x * 100.0, 0.0));
        EvalSample {
            pred_landmarks: pred,
            gt_landmarks: gt,
            width: 100,
            height: 100,
            prediction: None,
            category: None,
            accepted: Vec::new(),
        }
    }

    #[test]
    fn report_slot_mean() {
        let r = build_report(&[sample(0.1), sample(0.3)], &[1]).unwrap();
        assert!((r.per_landmark[6].unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(r.average, r.per_landmark[6]);
        assert!(r.topk.is_empty());
        assert!(matches!(build_report(&[], &[1]), Err(Error::EmptyEval)));
    }

    #[test]
    fn report_perfect_and_tsv() {
        let v = names(&["Tee", "Skirt"]);
        let mut s = sample(0.0);
        s.prediction = Some(CategoryDistribution::one_hot(v, "Tee").unwrap());
        s.category = Some("Tee".into());
        let r = build_report(&[s], &[1, 2]).unwrap();
        assert_eq!(r.average, Some(0.0));
        assert_eq!(r.topk[0].overall, 100.0);
        assert_eq!(r.topk[1].per_category["Tee"], 100.0);
        let tsv = r.to_tsv();
        let header = tsv.lines().next().unwrap();
        assert_eq!(
            header,
            "metric\tL.Collar\tR.Collar\tL.Sleeve\tR.Sleeve\tL.Waistline\tR.Waistline\tL.Hem\tR.Hem\tAvg."
        );
        assert!(tsv.ends_with('\n'));
    }
}
