//! Model files, synthetic instances, reports and benchmark sweeps.

pub mod generate;
pub mod metric;
pub mod report;
pub mod sweep;
pub mod uai;

pub use generate::{generate, GeneratorKind, InstanceSpec};
pub use metric::persistency_percentage;
pub use report::{RunReport, Verification};
pub use sweep::{rows_to_csv, run_sweep, SweepRow, SweepSpec};
pub use uai::{parse_uai, write_uai, ValueKind};
