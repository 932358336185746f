//! Supervised-learning records harvested from solved instances, plus the
//! dataset plumbing around them: spatial modes, persistence, splits and
//! feature standardization.
//!
//! File layout: `<name>.meta.json` (one [`DatasetMeta`] document) next to
//! `<name>.jsonl` (one [`Record`] per line, in generation order).

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_feasible, Stage1Assignment, Stage2Assignment};
use crate::scalar::Scalar;
use crate::solver::{solve_exact, SolveOptions};
use crate::world::{
    sample_instance, ClusterSpec, GridConfig, Instance, ModelConstants, Position, SampleSpec,
    SpatialMode,
};

/// Current on-disk schema version for dataset files.
pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// One training example: the instance's stage-1 features plus the optimal
/// stage-1 allocation as per-user class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record<T> {
    /// `[d(u0,s0..sS-1), R_0, d(u1,s0..), R_1, ...]`, length U*(S+1).
    pub features: Vec<T>,
    /// Per-user class in {0..S}; 0 means unassigned.
    pub labels: Vec<u32>,
    pub instance_seed: u64,
    pub objective: T,
    /// Relative optimality gap the label solve achieved.
    pub gap: T,
}

/// Everything needed to regenerate and interpret a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta<T> {
    pub version: u32,
    pub mode: SpatialMode,
    pub records: usize,
    pub users: usize,
    pub servers: usize,
    pub scenarios: usize,
    pub grid: GridConfig,
    pub master_seed: u64,
    /// Frozen server constellation shared by every record.
    pub server_layout: Vec<Position>,
    pub constants: ModelConstants<T>,
    pub energy_budget: T,
    pub capacity: T,
    pub cluster: ClusterSpec,
    pub request_range: (u32, u32),
    /// Solver limits used when labeling; records store the achieved gap.
    pub solver: SolveOptions,
}

/// A dataset in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub meta: DatasetMeta<T>,
    pub records: Vec<Record<T>>,
}

/// Generation parameters for [`generate_dataset`].
#[derive(Debug, Clone)]
pub struct DatasetSpec<T> {
    pub mode: SpatialMode,
    pub records: usize,
    pub users: usize,
    pub servers: usize,
    pub scenarios: usize,
    pub grid: GridConfig,
    pub constants: ModelConstants<T>,
    pub cluster: ClusterSpec,
    pub energy_budget: T,
    pub capacity: T,
    pub request_range: (u32, u32),
    pub solver: SolveOptions,
}

impl<T: Scalar> DatasetSpec<T> {
    pub fn new(mode: SpatialMode, records: usize, users: usize, servers: usize, scenarios: usize) -> Self {
        let sample = SampleSpec::<T>::new(mode, users, servers, scenarios);
        DatasetSpec {
            mode,
            records,
            users,
            servers,
            scenarios,
            grid: sample.grid,
            constants: sample.constants,
            cluster: sample.cluster,
            energy_budget: sample.energy_budget,
            capacity: sample.capacity,
            request_range: sample.request_range,
            solver: SolveOptions::default(),
        }
    }
}

/// Deterministically derive the seed of record `index` from the master seed
/// (splitmix64 over a golden-ratio sequence).
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stage-1 feature vector: for each user in index order, the effective
/// distances to every server (server index order) followed by the request
/// size. Deliberately blind to scenarios.
pub fn featurize<T: Scalar>(instance: &Instance<T>) -> Vec<T> {
    let mut features = Vec::with_capacity(instance.num_users() * (instance.num_servers() + 1));
    for i in 0..instance.num_users() {
        for j in 0..instance.num_servers() {
            features.push(T::from_count(instance.stage1_distance(i, j)));
        }
        features.push(T::from_count(instance.users[i].request));
    }
    features
}

impl<T: Scalar> DatasetMeta<T> {
    /// Spatial mode of record `index` (mixed datasets are a normal half
    /// followed by a special half).
    pub fn mode_of(&self, index: usize) -> SpatialMode {
        match self.mode {
            SpatialMode::Mixed => {
                if index < self.records / 2 {
                    SpatialMode::Normal
                } else {
                    SpatialMode::Special
                }
            }
            mode => mode,
        }
    }

    pub fn feature_len(&self) -> usize {
        self.users * (self.servers + 1)
    }

    fn sample_spec(&self, mode: SpatialMode) -> SampleSpec<T> {
        SampleSpec {
            mode,
            users: self.users,
            servers: self.servers,
            scenarios: self.scenarios,
            grid: self.grid,
            constants: self.constants.clone(),
            cluster: self.cluster,
            energy_budget: self.energy_budget,
            capacity: self.capacity,
            request_range: self.request_range,
            server_layout: Some(self.server_layout.clone()),
        }
    }

    /// Rebuild the instance behind record `index` from its stored seed.
    pub fn rebuild_instance(&self, index: usize, record: &Record<T>) -> Result<Instance<T>> {
        sample_instance(&self.sample_spec(self.mode_of(index)), record.instance_seed)
    }
}

/// Sample the frozen server constellation for a dataset.
fn sample_server_layout<T: Scalar>(spec: &DatasetSpec<T>, master_seed: u64) -> Vec<Position> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..spec.servers)
        .map(|_| Position {
            x: rng.gen_range(0..spec.grid.width),
            y: rng.gen_range(0..spec.grid.height),
        })
        .collect()
}

/// Generate `spec.records` solved records. The server layout is drawn once
/// from the master seed and shared; per-record seeds come from
/// [`derive_seed`], so regeneration is reproducible byte for byte. Records
/// are produced in parallel but stored in index order.
pub fn generate_dataset<T: Scalar>(spec: &DatasetSpec<T>, master_seed: u64) -> Result<Dataset<T>>
where
    T: Serialize + DeserializeOwned,
{
    if spec.records == 0 {
        return Err(Error::config("dataset needs at least one record"));
    }
    if spec.mode == SpatialMode::Mixed && spec.records % 2 != 0 {
        return Err(Error::config(
            "mixed datasets concatenate two equal halves; record count must be even",
        ));
    }
    if spec.mode == SpatialMode::Special || spec.mode == SpatialMode::Mixed {
        // fail fast on an invalid cluster before spawning work
        spec.cluster.bounds(spec.grid)?;
    }

    let server_layout = sample_server_layout(spec, master_seed);
    let meta = DatasetMeta {
        version: DATASET_SCHEMA_VERSION,
        mode: spec.mode,
        records: spec.records,
        users: spec.users,
        servers: spec.servers,
        scenarios: spec.scenarios,
        grid: spec.grid,
        master_seed,
        server_layout,
        constants: spec.constants.clone(),
        energy_budget: spec.energy_budget,
        capacity: spec.capacity,
        cluster: spec.cluster,
        request_range: spec.request_range,
        solver: spec.solver,
    };

    let records: Result<Vec<Record<T>>> = (0..spec.records)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(master_seed, index as u64);
            let instance = sample_instance(&meta.sample_spec(meta.mode_of(index)), seed)?;
            let solved = solve_exact(&instance, &spec.solver)?;
            Ok(Record {
                features: featurize(&instance),
                labels: solved.x1.choice,
                instance_seed: seed,
                objective: solved.objective,
                gap: solved.gap,
            })
        })
        .collect();

    Ok(Dataset {
        meta,
        records: records?,
    })
}

/// Check that a record's labels form a stage-1-feasible allocation on the
/// instance they were harvested from (energy budget plus the structural
/// at-most-one encoding).
pub fn labels_feasible<T: Scalar>(instance: &Instance<T>, labels: &[u32]) -> Result<bool> {
    let x1 = Stage1Assignment {
        choice: labels.to_vec(),
    };
    // copying stage 1 into every scenario isolates constraints 4 and 6
    let x2 = Stage2Assignment {
        choice: vec![labels.to_vec(); instance.num_scenarios()],
    };
    Ok(check_feasible(instance, &x1, &x2)?.is_feasible())
}

impl<T: Scalar> Dataset<T> {
    /// Feature matrix view (row per record).
    pub fn feature_rows(&self) -> Vec<Vec<T>> {
        self.records.iter().map(|r| r.features.clone()).collect()
    }

    /// Labels of one user across all records.
    pub fn user_labels(&self, user: usize) -> Vec<u32> {
        self.records.iter().map(|r| r.labels[user]).collect()
    }

    pub fn save(&self, dir: &Path, name: &str) -> Result<()>
    where
        T: Serialize,
    {
        fs::create_dir_all(dir)?;
        let meta = serde_json::to_string_pretty(&self.meta)?;
        fs::write(dir.join(format!("{name}.meta.json")), meta + "\n")?;
        let mut lines = String::new();
        for record in &self.records {
            lines.push_str(&serde_json::to_string(record)?);
            lines.push('\n');
        }
        fs::write(dir.join(format!("{name}.jsonl")), lines)?;
        Ok(())
    }

    pub fn load(dir: &Path, name: &str) -> Result<Self>
    where
        T: DeserializeOwned,
    {
        let meta_text = fs::read_to_string(dir.join(format!("{name}.meta.json")))?;
        let meta: DatasetMeta<T> = serde_json::from_str(&meta_text)?;
        if meta.version != DATASET_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported dataset schema version {}",
                meta.version
            )));
        }
        let lines = fs::read_to_string(dir.join(format!("{name}.jsonl")))?;
        let mut records = Vec::with_capacity(meta.records);
        for line in lines.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let record: Record<T> = serde_json::from_str(line)?;
            if record.features.len() != meta.feature_len() || record.labels.len() != meta.users {
                return Err(Error::dimension(
                    "record shape disagrees with dataset meta",
                ));
            }
            records.push(record);
        }
        if records.len() != meta.records {
            return Err(Error::dimension(format!(
                "dataset holds {} records, meta says {}",
                records.len(),
                meta.records
            )));
        }
        Ok(Dataset { meta, records })
    }

    /// Export features and labels as one CSV (header `f0..`, `y0..`).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = Vec::new();
        for k in 0..self.meta.feature_len() {
            header.push(format!("f{k}"));
        }
        for u in 0..self.meta.users {
            header.push(format!("y{u}"));
        }
        writer.write_record(&header)?;
        for record in &self.records {
            let mut row: Vec<String> = record.features.iter().map(|v| format!("{v}")).collect();
            row.extend(record.labels.iter().map(|l| l.to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// A reproducible train/test partition of record indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub ratio: f64,
    pub seed: u64,
}

/// Shuffle `0..n` with the seed and put the first `ceil(ratio * n)` indices
/// in train.
pub fn split(n: usize, ratio: f64, seed: u64) -> Result<Split> {
    if !(0.0..1.0).contains(&ratio) || ratio == 0.0 {
        return Err(Error::config("split ratio must lie strictly in (0, 1)"));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train_len = ((ratio * n as f64).ceil() as usize).min(n);
    if train_len == 0 || train_len == n {
        return Err(Error::config(format!(
            "split of {n} records at ratio {ratio} leaves one side empty"
        )));
    }
    let test = indices.split_off(train_len);
    Ok(Split {
        train: indices,
        test,
        ratio,
        seed,
    })
}

/// Per-feature standardization fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler<T> {
    pub mean: Vec<T>,
    /// Population standard deviation, floored at 1e-12.
    pub std: Vec<T>,
}

/// Fit means and (population) standard deviations on the given rows.
pub fn fit_scaler<T: Scalar>(rows: &[Vec<T>]) -> Result<Scaler<T>> {
    if rows.len() < 2 {
        return Err(Error::TrainingData(
            "scaler needs at least two training rows".into(),
        ));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::dimension("ragged feature rows"));
    }
    let n = T::from_usize(rows.len()).unwrap();
    let mut mean = vec![T::zero(); dim];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row) {
            *m = *m + *v;
        }
    }
    for m in mean.iter_mut() {
        *m = *m / n;
    }
    let mut var = vec![T::zero(); dim];
    for row in rows {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            let d = *v - *m;
            *s = *s + d * d;
        }
    }
    let floor = T::from_f64_lossy(1e-12);
    let std = var
        .into_iter()
        .map(|s| (s / n).sqrt().max(floor))
        .collect();
    Ok(Scaler { mean, std })
}

impl<T: Scalar> Scaler<T> {
    pub fn transform_row(&self, row: &[T]) -> Vec<T> {
        debug_assert_eq!(row.len(), self.mean.len());
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (*v - *m) / *s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<T>]) -> Vec<Vec<T>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests;
