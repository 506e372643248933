//! Benchmarks, configuration, artifacts and rate fitting.

pub mod benchmarks;
pub mod check;
pub mod config;
pub mod history_io;
pub mod mesh_io;
pub mod rates;
pub mod run;

pub use benchmarks::{benchmark, Benchmark, Quantity, BENCHMARK_NAMES};
pub use check::{check_names, run_checks, CheckResult};
pub use config::{load_config, parse_config, Mode, RunConfig};
pub use history_io::{export_history_csv, read_history_csv, HistoryWriter, HISTORY_HEADER};
pub use mesh_io::{export_surface_off, parse_off, surface_off, MeshState, OffMesh};
pub use rates::{fit_history, fit_rate, history_points, quantity_value, RateFit};
pub use run::{run_benchmark, run_benchmark_with, RunOutcome, HISTORY_FILE, OFF_FILE, STATE_FILE};
