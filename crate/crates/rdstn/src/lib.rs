//! Dataset handling, training orchestration, benchmark harness and file
//! formats around the pure-math `rdstn-core` crate.

pub mod checkpoint;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod loader;
pub mod png_io;
pub mod report;
pub mod trainer;

pub use error::{AppError, AppResult};

/// Environment variable that re-roots relative dataset paths.
pub const DATA_ROOT_ENV: &str = "RDSTN_DATA_ROOT";

use std::path::{Path, PathBuf};

/// Resolves a dataset path against `RDSTN_DATA_ROOT` when it is relative
/// and the variable is set.
pub fn resolve_data_path(p: &Path) -> PathBuf {
    if p.is_relative() {
        if let Ok(root) = std::env::var(DATA_ROOT_ENV) {
            if !root.is_empty() {
                return PathBuf::from(root).join(p);
            }
        }
    }
    p.to_path_buf()
}
