//! Benchmark report emission: `report.csv` and `report.json` (the JSON adds
//! metadata and per-scale best flags).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, AppError, AppResult};
use crate::eval::{BenchmarkTable, Cell};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonRow {
    method: String,
    scale: f64,
    /// Mean dB; null means every image reproduced exactly.
    psnr_db: Option<f64>,
    identical: usize,
    n_images: usize,
    /// Per-scale argmax flag; ties are all flagged.
    best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonReport {
    dataset_id: String,
    split_seed: Option<u64>,
    checkpoint_id: Option<String>,
    sigma: f64,
    skipped: usize,
    rows: Vec<JsonRow>,
}

fn best_flags(rows: &[Cell]) -> Vec<bool> {
    let mut flags = vec![false; rows.len()];
    let mut scales: Vec<f64> = rows.iter().map(|r| r.scale).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    for scale in scales {
        let group: Vec<usize> =
            (0..rows.len()).filter(|&i| rows[i].scale == scale).collect();
        let best = group
            .iter()
            .map(|&i| rows[i].rank_db())
            .fold(f64::NEG_INFINITY, f64::max);
        for &i in &group {
            if rows[i].rank_db() == best {
                flags[i] = true;
            }
        }
    }
    flags
}

pub fn write_csv(table: &BenchmarkTable, path: &Path) -> AppResult<()> {
    let mut out = String::from("method,scale,psnr_db,n_images,sigma\n");
    for row in &table.rows {
        let db = match row.psnr_db {
            Some(v) => format!("{v:.4}"),
            None => "inf".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method,
            row.scale,
            db,
            row.n_images,
            table.sigma
        ));
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn write_json(table: &BenchmarkTable, path: &Path) -> AppResult<()> {
    let flags = best_flags(&table.rows);
    let report = JsonReport {
        dataset_id: table.dataset_id.clone(),
        split_seed: table.split_seed,
        checkpoint_id: table.checkpoint_id.clone(),
        sigma: table.sigma,
        skipped: table.skipped,
        rows: table
            .rows
            .iter()
            .zip(flags)
            .map(|(r, best)| JsonRow {
                method: r.method.clone(),
                scale: r.scale,
                psnr_db: r.psnr_db,
                identical: r.identical,
                n_images: r.n_images,
                best,
            })
            .collect(),
    };
    fs::write(path, serde_json::to_string_pretty(&report)?).map_err(io_err(path))
}

/// Reads a JSON report back into a table (drops the derived best flags).
pub fn read_json(path: &Path) -> AppResult<BenchmarkTable> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let report: JsonReport = serde_json::from_str(&text).map_err(AppError::from)?;
    Ok(BenchmarkTable {
        dataset_id: report.dataset_id,
        split_seed: report.split_seed,
        checkpoint_id: report.checkpoint_id,
        sigma: report.sigma,
        skipped: report.skipped,
        rows: report
            .rows
            .into_iter()
            .map(|r| Cell {
                method: r.method.clone(),
                scale: r.scale,
                psnr_db: r.psnr_db,
                identical: r.identical,
                n_images: r.n_images,
            })
            .collect(),
    })
}
