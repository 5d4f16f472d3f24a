//! Randomized comparison of fast landmark inversion against exhaustive search.

use garment_augkit::lmmap::{default_candidate_count, invert_landmark_detailed, oracle_invert, InversionMethod};
use garment_augkit::warp::{make_displacement_fields, ElasticParams};
use garment_augkit::{Landmark, Result, RngStream};
use serde::Serialize;

/// Maximum allowed distance between the fast and exhaustive answers.
pub const TOLERANCE_PX: f64 = 2.0;
/// Required fraction of agreeing trials.
pub const REQUIRED_PASS_RATE: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub seed: u64,
    pub trials: usize,
    pub width: usize,
    pub height: usize,
    pub params: ElasticParams,
    /// `None` scales with the image size.
    pub candidates: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            width: 64,
            height: 64,
            params: ElasticParams { n_seeds: 3, alpha: 100.0, sigma: 10.0 },
            candidates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub trials: usize,
    pub candidates: usize,
    pub passes: usize,
    pub pass_rate: f64,
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
    /// Trials where the exact hash match fired.
    pub exact_fired: usize,
    /// Exact-match trials whose answer differs from the oracle's.
    pub exact_mismatches: usize,
    /// Trials where the fast inversion flagged the landmark out-of-frame.
    pub out_of_frame: usize,
    /// Trials where the oracle flagged the landmark out-of-frame.
    pub oracle_out_of_frame: usize,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.pass_rate >= REQUIRED_PASS_RATE && self.exact_mismatches == 0
    }

    pub fn report(&self) -> String {
        format!(
            "trials {}  candidates {}  pass {}/{} ({:.1}%)  max {:.3} px  mean {:.3} px  \
             exact {} (mismatched {})  out-of-frame {} (oracle {})  => {}",
            self.trials,
            self.candidates,
            self.passes,
            self.trials,
            100.0 * self.pass_rate,
            self.max_discrepancy,
            self.mean_discrepancy,
            self.exact_fired,
            self.exact_mismatches,
            self.out_of_frame,
            self.oracle_out_of_frame,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Trial `t` draws its field and then a landmark uniform over the canvas from
/// stream `derive(t)` of the master seed.
pub fn run_oracle(cfg: &OracleConfig) -> Result<OracleSummary> {
    cfg.params.validate()?;
    let n = cfg.candidates.unwrap_or_else(|| default_candidate_count(cfg.width, cfg.height));
    let master = RngStream::new(cfg.seed, 0);
    let mut s = OracleSummary {
        trials: cfg.trials,
        candidates: n,
        passes: 0,
        pass_rate: 0.0,
        max_discrepancy: 0.0,
        mean_discrepancy: 0.0,
        exact_fired: 0,
        exact_mismatches: 0,
        out_of_frame: 0,
        oracle_out_of_frame: 0,
    };
    let mut total = 0.0;
    for t in 0..cfg.trials {
        let mut rng = master.derive(t as u64);
        let fields = make_displacement_fields(cfg.width, cfg.height, &cfg.params, &mut rng)?;
        let lm = Landmark::visible(
            rng.uniform(0.0, cfg.width as f64)?,
            rng.uniform(0.0, cfg.height as f64)?,
        );
        let fast = invert_landmark_detailed(&fields, &lm, n);
        let slow = oracle_invert(&fields, &lm);
        let d = (fast.landmark.x - slow.landmark.x).hypot(fast.landmark.y - slow.landmark.y);
        total += d;
        s.max_discrepancy = s.max_discrepancy.max(d);
        if d <= TOLERANCE_PX {
            s.passes += 1;
        }
        if fast.method == InversionMethod::Exact {
            s.exact_fired += 1;
            if d != 0.0 {
                s.exact_mismatches += 1;
            }
        }
        s.out_of_frame += !fast.landmark.visibility.in_frame() as usize;
        s.oracle_out_of_frame += !slow.landmark.visibility.in_frame() as usize;
    }
    if cfg.trials > 0 {
        s.pass_rate = s.passes as f64 / cfg.trials as f64;
        s.mean_discrepancy = total / cfg.trials as f64;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_is_all_exact() {
        let cfg = OracleConfig {
            trials: 20,
            params: ElasticParams { n_seeds: 3, alpha: 0.0, sigma: 10.0 },
            ..OracleConfig::default()
        };
        let s = run_oracle(&cfg).unwrap();
        assert_eq!(s.passes, 20);
        assert_eq!(s.max_discrepancy, 0.0);
        assert!(s.passed());
    }

    #[test]
    fn extreme_alpha_reports_out_of_frame() {
        let cfg = OracleConfig {
            trials: 10,
            params: ElasticParams { n_seeds: 3, alpha: 1e4, sigma: 10.0 },
            ..OracleConfig::default()
        };
        let s = run_oracle(&cfg).unwrap();
        assert!(s.out_of_frame > 0);
    }
}
