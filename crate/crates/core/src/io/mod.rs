//! Configuration loading and result files.

mod config;
mod csv_io;
mod log;
mod presets;

pub use config::{check_times, load_config, load_preset, parse_config, sha256_hex, Checks, ConfigFile, LoadedConfig};
pub use csv_io::{
    fields_path, fmt_f64, read_snapshots, summary_path, write_fields, write_snapshots, write_summary, write_table,
};
pub use log::append_ndjson;
pub use presets::{preset, PRESETS};
