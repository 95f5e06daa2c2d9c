//! Batch runner for frame experiments: one JSON config in, a JSON report
//! and CSV tables out.
//!
//! ```no_run
//! use frechet_frames_cli::{presets, run, write_outputs};
//!
//! let cfg = presets::preset("weighted_shift").unwrap();
//! let report = run(&cfg).unwrap();
//! write_outputs(&report, &cfg.outputs, "out".as_ref()).unwrap();
//! assert!(report.summary.passed);
//! ```

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, Op, Step, Tolerances};
pub use error::RunError;
pub use output::{emit_decay_curves, write_level_csv, write_outputs};
pub use report::{RunReport, StepOutput, StepReport, Summary};
pub use runner::{run, run_with};
