pub mod bench;
pub mod eval;
pub mod gen;
pub mod predict;
pub mod solve;
pub mod train;

use std::path::{Path, PathBuf};

use edge_placer_core::dataset::{split, Dataset};
use edge_placer_core::error::{Error, Result};
use edge_placer_core::world::SpatialMode;

/// Split a `dir/name` dataset prefix into its directory and file stem.
pub(crate) fn dataset_prefix(path: &Path) -> Result<(PathBuf, String)> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .filter(|n| !n.is_empty())
        .ok_or_else(|| Error::config(format!("invalid dataset prefix {}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let dir = if dir.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        dir
    };
    Ok((dir, name.to_string()))
}

pub(crate) fn load_dataset(prefix: &Path) -> Result<Dataset<f64>> {
    let (dir, name) = dataset_prefix(prefix)?;
    Dataset::load(&dir, &name)
}

pub(crate) fn parse_mode(text: &str) -> Result<SpatialMode> {
    match text {
        "normal" => Ok(SpatialMode::Normal),
        "special" => Ok(SpatialMode::Special),
        "mixed" => Ok(SpatialMode::Mixed),
        other => Err(Error::config(format!(
            "unknown mode '{other}' (expected normal, special or mixed)"
        ))),
    }
}

/// Feature rows and per-user label columns for a train/test split.
pub(crate) struct SplitData {
    pub train_x: Vec<Vec<f64>>,
    pub train_labels: Vec<Vec<u32>>,
    pub test_x: Vec<Vec<f64>>,
    pub test_labels: Vec<Vec<u32>>,
}

pub(crate) fn split_dataset(
    dataset: &Dataset<f64>,
    ratio: f64,
    seed: u64,
) -> Result<SplitData> {
    let parts = split(dataset.records.len(), ratio, seed)?;
    let users = dataset.meta.users;
    let gather_x = |idx: &[usize]| -> Vec<Vec<f64>> {
        idx.iter()
            .map(|&i| dataset.records[i].features.clone())
            .collect()
    };
    let gather_labels = |idx: &[usize]| -> Vec<Vec<u32>> {
        (0..users)
            .map(|u| idx.iter().map(|&i| dataset.records[i].labels[u]).collect())
            .collect()
    };
    Ok(SplitData {
        train_x: gather_x(&parts.train),
        train_labels: gather_labels(&parts.train),
        test_x: gather_x(&parts.test),
        test_labels: gather_labels(&parts.test),
    })
}
