use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use garment_augkit::dataio::record::parse_records;
use garment_augkit::dataio::{
    join_annotations, load_png, parse_bbox_file, parse_category_file, parse_landmark_file,
    save_png, AnnotatedSample,
};
use garment_augkit::heatmap::{encode_heatmaps, HeatmapStack};
use garment_augkit::orient::tensor_io::load_tensor;
use garment_augkit::warp::ElasticParams;
use garment_augkit_cli::config::{Candidates, PipelineConfig, Settings};
use garment_augkit_cli::oracle::OracleConfig;
use garment_augkit_cli::{cmd_augment, cmd_eval, overlay, resolve_seed, run_oracle, Mask};
use ndarray::{Array2, Axis, Ix3};

#[derive(Parser)]
#[command(name = "garment-augkit", version, about = "Garment image augmentation and landmark tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crop, rotate and elastically warp a dataset, re-localizing landmarks.
    Augment(AugmentArgs),
    /// Compare a prediction record file with ground truth.
    Eval(EvalArgs),
    /// Check fast landmark inversion against exhaustive search.
    Oracle(OracleArgs),
    /// Draw landmarks (and optionally heatmaps) over an image.
    Overlay(OverlayArgs),
}

#[derive(Args)]
struct AugmentArgs {
    /// key = value pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; falls back to the config file, then GARMENT_AUGKIT_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra KEY=VALUE config overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory that annotation paths are relative to.
    #[arg(long)]
    images: PathBuf,
    /// Single-file key=value annotation records.
    #[arg(long, conflicts_with_all = ["landmarks", "bbox", "category"])]
    records: Option<PathBuf>,
    #[arg(long, required_unless_present = "records")]
    landmarks: Option<PathBuf>,
    #[arg(long)]
    bbox: Option<PathBuf>,
    #[arg(long)]
    category: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Comma-separated k values for top-k accuracy.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    k: Vec<usize>,
    /// `ctu` for the bundled mapping, or a mask file.
    #[arg(long)]
    mask: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Square canvas side.
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long)]
    n_seeds: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Candidate count per axis; scaled to the canvas when omitted.
    #[arg(long)]
    candidates: Option<usize>,
    /// Exit with status 1 when the comparison fails.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct OverlayArgs {
    #[arg(long)]
    image: PathBuf,
    /// Record file holding the landmarks.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Record to draw; defaults to the first one.
    #[arg(long)]
    path: Option<String>,
    /// Heatmap tensor of shape 8 x height x width.
    #[arg(long, conflicts_with = "render_heatmaps")]
    heatmaps: Option<PathBuf>,
    /// Render Gaussian heatmaps of this width from the landmarks.
    #[arg(long)]
    render_heatmaps: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_samples(args: &AugmentArgs) -> Result<Vec<AnnotatedSample>> {
    if let Some(r) = &args.records {
        let recs = parse_records(&read(r)?).with_context(|| format!("parsing {}", r.display()))?;
        return Ok(recs.into_iter().map(|r| r.sample).collect());
    }
    let lm_path = args.landmarks.as_ref().expect("enforced by clap");
    let lms = parse_landmark_file(&read(lm_path)?)
        .with_context(|| format!("parsing {}", lm_path.display()))?;
    let boxes = match &args.bbox {
        Some(p) => parse_bbox_file(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => Vec::new(),
    };
    let cats = match &args.category {
        Some(p) => parse_category_file(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => Vec::new(),
    };
    let joined = join_annotations(lms, boxes, cats);
    let u = &joined.unmatched;
    for p in &u.orphan_bbox {
        eprintln!("warning: box for unknown image `{p}`");
    }
    for p in &u.orphan_category {
        eprintln!("warning: category for unknown image `{p}`");
    }
    if args.bbox.is_some() && !u.missing_bbox.is_empty() {
        eprintln!("warning: {} images without a box use the full frame", u.missing_bbox.len());
    }
    if args.category.is_some() && !u.missing_category.is_empty() {
        eprintln!("warning: {} images without a category", u.missing_category.len());
    }
    Ok(joined.samples)
}

fn augment(args: AugmentArgs) -> Result<ExitCode> {
    let mut settings = match &args.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    settings.apply_overrides(&args.overrides)?;
    if let Some(out) = &args.out {
        settings.set("out", &out.to_string_lossy())?;
    }
    let cfg = PipelineConfig::from_settings(&settings, args.seed)?;
    let samples = load_samples(&args)?;
    let summary = cmd_augment(&samples, &args.images, &cfg, args.jobs)?;
    for e in summary.manifest.iter().filter(|e| e.status != "ok") {
        eprintln!("error: {}: {}", e.path, e.error.as_deref().unwrap_or("unknown"));
    }
    println!(
        "augmented {} of {} images into {} (seed {})",
        summary.succeeded,
        summary.manifest.len(),
        cfg.out.display(),
        cfg.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    let mask = args.mask.as_deref().map(Mask::load).transpose()?;
    let outcome = cmd_eval(&args.pred, &args.gt, &args.k, mask.as_ref())?;
    if !outcome.unmatched.is_empty() {
        for p in &outcome.unmatched {
            eprintln!("warning: `{p}` is missing from one of the files");
        }
        eprintln!("warning: {} unmatched paths excluded", outcome.unmatched.len());
    }
    print!("{}", outcome.report.to_tsv());
    Ok(ExitCode::SUCCESS)
}

fn oracle(args: OracleArgs) -> Result<ExitCode> {
    let settings = match &args.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let d = OracleConfig::default();
    let params = ElasticParams::new(
        args.n_seeds.or(settings.get("n_seeds")?).unwrap_or(d.params.n_seeds),
        args.alpha.or(settings.get("alpha")?).unwrap_or(d.params.alpha),
        args.sigma.or(settings.get("sigma")?).unwrap_or(d.params.sigma),
    )?;
    let candidates = match args.candidates {
        Some(n) => Some(n),
        None => match settings.get::<Candidates>("candidates")? {
            Some(Candidates::Fixed(n)) => Some(n),
            _ => None,
        },
    };
    if args.trials == 0 || args.size == 0 {
        bail!("trials and size must be positive");
    }
    let cfg = OracleConfig {
        seed: resolve_seed(args.seed, &settings)?,
        trials: args.trials,
        width: args.size,
        height: args.size,
        params,
        candidates,
    };
    let summary = run_oracle(&cfg)?;
    println!("{}", summary.report());
    Ok(if args.strict && !summary.passed() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn heatmaps_from_tensor(path: &Path) -> Result<HeatmapStack> {
    let t = load_tensor(path)?
        .into_dimensionality::<Ix3>()
        .context("heatmap tensor must have shape 8 x height x width")?;
    let planes: Vec<Array2<f64>> = t.axis_iter(Axis(0)).map(|p| p.to_owned()).collect();
    Ok(HeatmapStack::from_planes(planes)?)
}

fn overlay_cmd(args: OverlayArgs) -> Result<ExitCode> {
    let img = load_png(&args.image)?;
    let lms = match &args.annotations {
        Some(p) => {
            let recs = parse_records(&read(p)?)?;
            let rec = match &args.path {
                Some(k) => recs.into_iter().find(|r| &r.sample.path == k),
                None => recs.into_iter().next(),
            };
            match rec {
                Some(r) => r.sample.landmarks,
                None => bail!("no matching record in {}", p.display()),
            }
        }
        None => Default::default(),
    };
    let hm = match (&args.heatmaps, args.render_heatmaps) {
        (Some(p), _) => Some(heatmaps_from_tensor(p)?),
        (None, Some(s)) => Some(encode_heatmaps(&lms, img.width(), img.height(), s)?),
        _ => None,
    };
    let out = overlay(&img, &lms, hm.as_ref())?;
    save_png(&args.out, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Augment(a) => augment(a),
        Command::Eval(a) => eval(a),
        Command::Oracle(a) => oracle(a),
        Command::Overlay(a) => overlay_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
