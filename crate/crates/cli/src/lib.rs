//! Library side of the `garment-augkit` command: every subcommand is a plain
//! function so it can be driven from tests.

pub mod augment;
pub mod config;
pub mod eval;
pub mod oracle;
pub mod overlay;

pub use augment::{augment_image, cmd_augment, AugmentSummary, ManifestEntry};
pub use config::{resolve_seed, PipelineConfig, Settings, SEED_ENV};
pub use eval::{cmd_eval, evaluate, EvalOutcome, Mask};
pub use oracle::{run_oracle, OracleConfig, OracleSummary};
pub use overlay::overlay;
