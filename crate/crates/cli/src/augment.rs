//! Batch augmentation: crop → rotate → elastic, one RNG stream per image.

use std::fs;
use std::path::{Component, Path, PathBuf};

use anyhow::{bail, Context, Result};
use garment_augkit::dataio::record::{serialize_records, Record};
use garment_augkit::dataio::{
    crop_resize, load_png, save_png, serialize_bbox_file, serialize_category_file,
    serialize_landmark_file, AnnotatedSample, Bbox,
};
use garment_augkit::warp::{elastic_warp_with, rotate_image, rotate_landmarks};
use garment_augkit::{Image, LandmarkSet, RngStream};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;

/// One line of `manifest.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub path: String,
    pub output: Option<String>,
    pub seed: u64,
    pub stream_id: u64,
    pub crop: Option<[i64; 4]>,
    pub theta: Option<f64>,
    pub elastic: Option<ElasticRecord>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElasticRecord {
    pub n_seeds: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub candidates: usize,
    pub max_displacement: f64,
}

#[derive(Debug, Clone)]
pub struct AugmentSummary {
    pub manifest: Vec<ManifestEntry>,
    pub succeeded: usize,
    pub failed: usize,
}

struct Augmented {
    image: Image,
    sample: AnnotatedSample,
    entry: ManifestEntry,
}

/// `img/0001.jpg` → `images/img/0001.png`; refuses paths escaping the output.
fn output_path(path: &str) -> Result<PathBuf> {
    let p = Path::new(path);
    if p.components().any(|c| !matches!(c, Component::Normal(_))) {
        bail!("refusing to write outside the output directory: `{path}`");
    }
    Ok(Path::new("images").join(p).with_extension("png"))
}

/// Runs the configured chain on one decoded image. Pure given `rng`.
pub fn augment_image(
    img: &Image,
    sample: &AnnotatedSample,
    cfg: &PipelineConfig,
    rng: &mut RngStream,
) -> Result<(Image, LandmarkSet, ManifestEntry)> {
    let mut entry = ManifestEntry {
        index: 0,
        path: sample.path.clone(),
        output: None,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        crop: None,
        theta: None,
        elastic: None,
        status: "ok".into(),
        error: None,
    };
    let mut img = img.clone();
    let mut lms = sample.landmarks;
    if cfg.crop {
        let bbox = sample.bbox.unwrap_or(Bbox::full(img.width(), img.height()));
        let (i, l) = crop_resize(&img, bbox, &lms, cfg.target_size)?;
        img = i;
        lms = l;
        entry.crop = Some([bbox.x1, bbox.y1, bbox.x2, bbox.y2]);
    }
    if cfg.rotate {
        let (lo, hi) = cfg.rotation_range;
        let theta = rng.uniform(lo, hi)?;
        let fill = vec![cfg.fill; img.channels()];
        let (w, h) = (img.width(), img.height());
        img = rotate_image(&img, theta, &fill)?;
        let center = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
        lms = rotate_landmarks(&lms, theta, center, (w, h));
        entry.theta = Some(theta);
    }
    if cfg.elastic {
        let n = cfg.candidates.resolve(img.width(), img.height());
        let out = elastic_warp_with(&img, &lms, &cfg.elastic_params, rng, n)?;
        let p = &cfg.elastic_params;
        entry.elastic = Some(ElasticRecord {
            n_seeds: p.n_seeds,
            alpha: p.alpha,
            sigma: p.sigma,
            candidates: n,
            max_displacement: out.fields.max_abs(),
        });
        img = out.image;
        lms = out.landmarks;
    }
    Ok((img, lms, entry))
}

fn process(
    index: usize,
    sample: &AnnotatedSample,
    image_dir: &Path,
    cfg: &PipelineConfig,
    master: &RngStream,
) -> Result<Augmented, ManifestEntry> {
    let mut rng = master.derive(index as u64);
    let fail = |e: anyhow::Error| ManifestEntry {
        index,
        path: sample.path.clone(),
        output: None,
        seed: master.seed(),
        stream_id: master.derive(index as u64).stream_id(),
        crop: None,
        theta: None,
        elastic: None,
        status: "error".into(),
        error: Some(format!("{e:#}")),
    };
    let mut run = || -> Result<Augmented> {
        let rel = output_path(&sample.path)?;
        let img = load_png(&image_dir.join(&sample.path))?;
        let (image, lms, mut entry) = augment_image(&img, sample, cfg, &mut rng)?;
        entry.index = index;
        let rel_str = rel.to_string_lossy().replace('\\', "/");
        entry.output = Some(rel_str.clone());
        let mut out = sample.clone();
        out.path = rel_str;
        out.landmarks = lms;
        out.bbox = Some(Bbox::full(image.width(), image.height()));
        Ok(Augmented { image, sample: out, entry })
    };
    run().map_err(fail)
}

/// Augments every sample, writing images and annotations under `cfg.out`.
///
/// Unreadable images are recorded in the manifest and skipped. Output bytes
/// do not depend on `jobs`.
pub fn cmd_augment(
    samples: &[AnnotatedSample],
    image_dir: &Path,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<AugmentSummary> {
    let out_dir = &cfg.out;
    fs::create_dir_all(out_dir.join("images"))
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let master = RngStream::new(cfg.seed, 0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building worker pool")?;
    let results: Vec<Result<Augmented, ManifestEntry>> = pool.install(|| {
        samples
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let r = process(i, s, image_dir, cfg, &master)?;
                let dest = out_dir.join(r.entry.output.as_deref().expect("set on success"));
                let write = || -> Result<()> {
                    if let Some(parent) = dest.parent() {
                        fs::create_dir_all(parent)?;
                    }
                    save_png(&dest, &r.image)?;
                    Ok(())
                };
                match write() {
                    Ok(()) => Ok(r),
                    Err(e) => {
                        let mut entry = r.entry;
                        entry.status = "error".into();
                        entry.error = Some(format!("{e:#}"));
                        Err(entry)
                    }
                }
            })
            .collect()
    });

    let mut manifest = Vec::with_capacity(results.len());
    let mut done = Vec::new();
    for r in results {
        match r {
            Ok(a) => {
                manifest.push(a.entry);
                done.push((a.sample, a.image.width(), a.image.height()));
            }
            Err(entry) => manifest.push(entry),
        }
    }

    let mut jsonl = String::new();
    for e in &manifest {
        jsonl.push_str(&serde_json::to_string(e)?);
        jsonl.push('\n');
    }
    let write = |name: &str, text: String| {
        let p = out_dir.join(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    write("manifest.jsonl", jsonl)?;
    let out_samples: Vec<AnnotatedSample> = done.iter().map(|(s, _, _)| s.clone()).collect();
    write("list_landmarks.txt", serialize_landmark_file(&out_samples))?;
    write(
        "list_bbox.txt",
        serialize_bbox_file(
            &out_samples
                .iter()
                .map(|s| (s.path.clone(), s.bbox.expect("set on success")))
                .collect::<Vec<_>>(),
        ),
    )?;
    write(
        "list_category_img.txt",
        serialize_category_file(
            &out_samples
                .iter()
                .filter_map(|s| Some((s.path.clone(), s.category.clone()?)))
                .collect::<Vec<_>>(),
        ),
    )?;
    let records: Vec<Record> = done
        .into_iter()
        .map(|(s, w, h)| {
            let mut r = Record::new(s);
            r.size = Some((w, h));
            r
        })
        .collect();
    write("annotations.txt", serialize_records(&records))?;

    let failed = manifest.iter().filter(|e| e.status != "ok").count();
    Ok(AugmentSummary { succeeded: manifest.len() - failed, failed, manifest })
}
