//! Experiment harness: configuration files, Monte Carlo sweeps, CSV output
//! and runtime self-checks.

mod config_file;
mod records;
mod sweep;
mod validate;

pub use config_file::{load_config, parse_config, ConfigFile};
pub use records::{emit_csv, read_csv, write_csv, CSV_HEADER};
pub use sweep::{mean_throughput, run_sweep, ResultRecord, Scheme, SweepParam, SweepSpec};
pub use validate::{run_validation, Check};
