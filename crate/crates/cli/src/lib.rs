//! Experiment harness for quasi-proportional auctions: parameter sweeps
//! written as CSV, and the acceptance checks run by `quasiprop verify`.

pub mod error;
pub mod format;
pub mod sweep;
pub mod verify;

pub use error::{HarnessError, Result};
pub use sweep::{run_sweep, write_csv, AlphaGrid, SweepRow, SweepSpec};
pub use verify::{CriterionReport, Verifier, VerifySettings, CRITERIA};

/// Environment variable holding the worker-thread count for sweeps and checks.
pub const WORKERS_ENV: &str = "QUASIPROP_WORKERS";
