//! CSV report rows. Every report written by a command parses back into its
//! row type with the same `csv`+`serde` machinery.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use edge_placer_core::error::Result;

pub fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_rows<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn pct(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

/// Per-user grid-search winner for the SVM family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmGridRow {
    pub user: usize,
    pub accuracy_pct: f64,
    pub cv_mean_pct: f64,
    pub kernel: String,
    pub gamma: f64,
    pub c: f64,
}

/// Per-user grid-search winner for the MLP family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpGridRow {
    pub user: usize,
    pub accuracy_pct: f64,
    pub cv_mean_pct: f64,
    pub hidden_layer_sizes: String,
    pub alpha: f64,
}

/// One factorial run with its per-mode minimum accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoeRunRow {
    pub id: usize,
    pub kernel: String,
    pub gamma: f64,
    pub c: f64,
    pub min_accuracy_normal_pct: f64,
    pub min_accuracy_special_pct: f64,
    pub min_accuracy_mixed_pct: f64,
}

/// Mean response of one factor level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainEffectRow {
    pub factor: String,
    pub level: String,
    pub normal_pct: f64,
    pub special_pct: f64,
    pub mixed_pct: f64,
    pub overall_pct: f64,
}

/// Factor influence as the spread of its level means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceRow {
    pub factor: String,
    pub range_normal_pct: f64,
    pub range_special_pct: f64,
    pub range_mixed_pct: f64,
    pub range_overall_pct: f64,
}

/// The shared hyperparameter setting the design selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedSettingRow {
    pub kernel: String,
    pub gamma: f64,
    pub c: f64,
}

/// Per-user accuracy of the selected setting across the three modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoeUserAccuracyRow {
    pub user: usize,
    pub normal_pct: f64,
    pub special_pct: f64,
    pub mixed_pct: f64,
}

/// Summary row in the style of the model-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummaryRow {
    pub model: String,
    pub situation: String,
    pub min_accuracy_pct: f64,
    pub average_accuracy_pct: f64,
}

/// Per-user accuracy detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalUserRow {
    pub user: usize,
    pub accuracy_pct: f64,
}

/// One benchmark ladder row. Timing columns stay separate from the
/// deterministic shape columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub users: usize,
    pub servers: usize,
    pub scenarios: usize,
    pub solver_status: String,
    pub solver_seconds: f64,
    pub solver_objective: f64,
    pub solver_gap: f64,
    pub inference_seconds: Option<f64>,
    pub speedup: Option<f64>,
}

/// Runs-per-shift projection row (8-hour shift at several cadences).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub method: String,
    pub users: usize,
    pub servers: usize,
    pub scenarios: usize,
    pub seconds_per_run: f64,
    pub total_1_run: f64,
    pub total_32_runs: f64,
    pub total_48_runs: f64,
    pub total_60_runs: f64,
    pub total_96_runs: f64,
}

/// User or server coordinates for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationRow {
    pub entity: String,
    pub record: Option<usize>,
    pub index: usize,
    pub x: u32,
    pub y: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn rows_round_trip_through_csv() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bench.csv");
        let rows = vec![
            BenchRow {
                users: 10,
                servers: 3,
                scenarios: 15,
                solver_status: "optimal".into(),
                solver_seconds: 0.25,
                solver_objective: 123.5,
                solver_gap: 0.0,
                inference_seconds: Some(0.0001),
                speedup: Some(2500.0),
            },
            BenchRow {
                users: 30,
                servers: 7,
                scenarios: 35,
                solver_status: ">limit".into(),
                solver_seconds: 300.0,
                solver_objective: 999.0,
                solver_gap: 0.2,
                inference_seconds: None,
                speedup: None,
            },
        ];
        write_rows(&path, &rows).unwrap();
        let back: Vec<BenchRow> = read_rows(&path).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn pct_rounds_to_two_decimals() {
        assert_eq!(pct(0.8811111), 88.11);
        assert_eq!(pct(1.0), 100.0);
    }
}
