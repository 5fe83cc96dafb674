//! Dataset discovery, seeded train/test splitting and the JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rdstn_core::rng::{stream_rng, Stream};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, AppError, AppResult};

/// Seed-reproducible partition of a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub ratio: f64,
    /// Directory the file names are relative to.
    pub data_dir: PathBuf,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl DatasetSplit {
    pub fn train_paths(&self) -> Vec<PathBuf> {
        self.train.iter().map(|n| self.data_dir.join(n)).collect()
    }

    pub fn test_paths(&self) -> Vec<PathBuf> {
        self.test.iter().map(|n| self.data_dir.join(n)).collect()
    }

    pub fn save(&self, path: &Path) -> AppResult<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn is_supported(name: &str) -> bool {
    Path::new(name)
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("png"))
        .unwrap_or(false)
}

/// Image file names directly under `dir`, sorted for determinism.
pub fn list_images(dir: &Path) -> AppResult<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(io_err(dir))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| is_supported(n))
        .collect();
    names.sort();
    Ok(names)
}

/// Deterministic split of already-discovered names: Fisher-Yates shuffle
/// seeded by `seed`, first `ceil(ratio * n)` files to train.
pub fn split_names(mut names: Vec<String>, ratio: f64, seed: u64) -> AppResult<(Vec<String>, Vec<String>)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(AppError::InvalidArgument(format!("split ratio must be in [0, 1], got {ratio}")));
    }
    names.sort();
    let mut rng = stream_rng(seed, Stream::Split, 0);
    for i in (1..names.len()).rev() {
        let j = rng.gen_range(0..=i);
        names.swap(i, j);
    }
    let n_train = (ratio * names.len() as f64).ceil() as usize;
    let test = names.split_off(n_train.min(names.len()));
    Ok((names, test))
}

/// Discovers images under `dir` and splits them.
pub fn split_dataset(dir: &Path, ratio: f64, seed: u64) -> AppResult<DatasetSplit> {
    let names = list_images(dir)?;
    if names.is_empty() {
        return Err(AppError::EmptyDataset(dir.to_path_buf()));
    }
    let (train, test) = split_names(names, ratio, seed)?;
    Ok(DatasetSplit { seed, ratio, data_dir: dir.to_path_buf(), train, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img_{i:04}.png")).collect()
    }

    #[test]
    fn ten_files_split_eight_two() {
        let (train, test) = split_names(fake_names(10), 0.8, 1).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 2);
    }

    #[test]
    fn busi_sized_set_splits_624_155() {
        let (train, test) = split_names(fake_names(779), 0.8, 42).unwrap();
        assert_eq!(train.len(), 624); // ceil(0.8 * 779)
        assert_eq!(test.len(), 155);
    }

    #[test]
    fn split_is_a_seed_deterministic_partition() {
        let names = fake_names(37);
        let (tr1, te1) = split_names(names.clone(), 0.7, 9).unwrap();
        let (tr2, te2) = split_names(names.clone(), 0.7, 9).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        let (tr3, _) = split_names(names.clone(), 0.7, 10).unwrap();
        assert_ne!(tr1, tr3);

        // partition: disjoint and exhaustive
        let mut all: Vec<String> = tr1.iter().chain(te1.iter()).cloned().collect();
        all.sort();
        let mut orig = names;
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn list_order_does_not_change_the_split() {
        let mut shuffled = fake_names(20);
        shuffled.reverse();
        let a = split_names(fake_names(20), 0.8, 3).unwrap();
        let b = split_names(shuffled, 0.8, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = split_dataset(dir.path(), 0.8, 0).unwrap_err();
        assert!(matches!(err, AppError::EmptyDataset(_)));
    }

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let split = DatasetSplit {
            seed: 5,
            ratio: 0.8,
            data_dir: PathBuf::from("/data/busi"),
            train: fake_names(3),
            test: fake_names(1),
        };
        let path = dir.path().join("manifest.json");
        split.save(&path).unwrap();
        assert_eq!(DatasetSplit::load(&path).unwrap(), split);
    }
}
