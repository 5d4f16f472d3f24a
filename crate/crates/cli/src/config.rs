//! Flat `key = value` pipeline configuration.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use garment_augkit::heatmap::DEFAULT_SIGMA;
use garment_augkit::warp::ElasticParams;

/// Environment variable consulted when neither a flag nor the config file
/// sets the seed.
pub const SEED_ENV: &str = "GARMENT_AUGKIT_SEED";

pub const KEYS: &[&str] = &[
    "seed",
    "crop",
    "rotate",
    "elastic",
    "n_seeds",
    "alpha",
    "sigma",
    "rotation_min",
    "rotation_max",
    "target_size",
    "candidates",
    "heatmap_sigma",
    "fill",
    "out",
];

/// Raw, validated-for-known-keys settings in file order of precedence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            s.set(k.trim(), v.trim()).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            bail!("unknown config key `{key}`");
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `KEY=VALUE` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| anyhow!("override `{o}` is not KEY=VALUE"))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key `{key}` = `{v}`: {e}")))
            .transpose()
    }
}

/// `flag > config > environment > 0`.
pub fn resolve_seed(flag: Option<u64>, settings: &Settings) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = settings.get::<u64>("seed")? {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| anyhow!("{SEED_ENV}=`{v}`: {e}")),
        Err(_) => Ok(0),
    }
}

/// Candidate count for landmark inversion: a fixed number, or scaled to the
/// image size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidates {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for Candidates {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Candidates::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Candidates::Fixed(n)),
            _ => Err(format!("expected `auto` or a positive count, got `{s}`")),
        }
    }
}

impl Candidates {
    pub fn resolve(self, width: usize, height: usize) -> usize {
        match self {
            Candidates::Auto => garment_augkit::lmmap::default_candidate_count(width, height),
            Candidates::Fixed(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub crop: bool,
    pub rotate: bool,
    pub elastic: bool,
    pub elastic_params: ElasticParams,
    pub rotation_range: (f64, f64),
    pub target_size: usize,
    pub candidates: Candidates,
    pub heatmap_sigma: f64,
    /// Gray level used where rotation exposes pixels outside the source.
    pub fill: f64,
    pub out: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            crop: true,
            rotate: true,
            elastic: true,
            elastic_params: ElasticParams::default(),
            rotation_range: (0.0, TAU),
            target_size: 224,
            candidates: Candidates::Auto,
            heatmap_sigma: DEFAULT_SIGMA,
            fill: 0.0,
            out: PathBuf::from("augmented"),
        }
    }
}

impl PipelineConfig {
    /// Defaults overlaid with `settings`; the seed follows [`resolve_seed`].
    pub fn from_settings(settings: &Settings, seed_flag: Option<u64>) -> Result<Self> {
        let d = Self::default();
        let p = &d.elastic_params;
        let cfg = Self {
            seed: resolve_seed(seed_flag, settings)?,
            crop: settings.get("crop")?.unwrap_or(d.crop),
            rotate: settings.get("rotate")?.unwrap_or(d.rotate),
            elastic: settings.get("elastic")?.unwrap_or(d.elastic),
            elastic_params: ElasticParams::new(
                settings.get("n_seeds")?.unwrap_or(p.n_seeds),
                settings.get("alpha")?.unwrap_or(p.alpha),
                settings.get("sigma")?.unwrap_or(p.sigma),
            )?,
            rotation_range: (
                settings.get("rotation_min")?.unwrap_or(d.rotation_range.0),
                settings.get("rotation_max")?.unwrap_or(d.rotation_range.1),
            ),
            target_size: settings.get("target_size")?.unwrap_or(d.target_size),
            candidates: settings.get("candidates")?.unwrap_or(d.candidates),
            heatmap_sigma: settings.get("heatmap_sigma")?.unwrap_or(d.heatmap_sigma),
            fill: settings.get("fill")?.unwrap_or(d.fill),
            out: settings.get("out")?.unwrap_or(d.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.rotation_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            bail!("rotation range [{lo}, {hi}) is invalid");
        }
        if self.target_size == 0 {
            bail!("target_size must be positive");
        }
        if !(self.heatmap_sigma > 0.0) {
            bail!("heatmap_sigma must be positive");
        }
        if !(0.0..=1.0).contains(&self.fill) {
            bail!("fill must lie in [0, 1]");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::from_settings(&Settings::default(), Some(5)).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.elastic_params, ElasticParams::new(3, 500.0, 40.0).unwrap());
        assert_eq!(c.target_size, 224);
        assert_eq!(c.candidates.resolve(224, 224), 200);
        assert_eq!(c.rotation_range, (0.0, TAU));
    }

    #[test]
    fn parses_and_rejects() {
        let s = Settings::parse("# comment\nalpha = 100\nsigma=10 # inline\nrotate=false\n").unwrap();
        let c = PipelineConfig::from_settings(&s, Some(0)).unwrap();
        assert_eq!(c.elastic_params.alpha, 100.0);
        assert_eq!(c.elastic_params.sigma, 10.0);
        assert!(!c.rotate);
        assert!(Settings::parse("bogus = 1").is_err());
        assert!(Settings::parse("alpha").is_err());
        let bad = Settings::parse("alpha = lots").unwrap();
        assert!(PipelineConfig::from_settings(&bad, Some(0)).is_err());
    }

    #[test]
    fn flag_beats_file() {
        let s = Settings::parse("seed = 9").unwrap();
        assert_eq!(resolve_seed(Some(3), &s).unwrap(), 3);
        assert_eq!(resolve_seed(None, &s).unwrap(), 9);
    }
}
