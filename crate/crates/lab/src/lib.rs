//! Experiment runner for forward compositions of finite Blaschke products.
//!
//! A run reads a flat `key = value` config naming a preset, executes it and
//! writes one CSV per statistic plus `manifest.json` with content hashes.

pub mod config;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{ConfigError, ExperimentConfig};
pub use presets::Preset;
pub use report::Report;
pub use run::{execute, execute_with_threads, RunError};

/// Every configured check passed.
pub const EXIT_PASS: i32 = 0;
/// The run finished but a check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// The config or command line was rejected.
pub const EXIT_CONFIG: i32 = 2;
/// A computation or I/O step failed.
pub const EXIT_RUNTIME: i32 = 3;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "BLASCHKE_LAB_OUT";

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Core(_) | RunError::Io(_) => EXIT_RUNTIME,
        }
    }
}
