//! `edge-placer gen`: generate a labeled dataset and its plotting CSVs.

use std::path::PathBuf;

use clap::Args;

use edge_placer_core::dataset::generate_dataset;
use edge_placer_core::error::Result;

use crate::commands::parse_mode;
use crate::config::Config;
use crate::reports::{write_rows, LocationRow};

#[derive(Debug, Args)]
pub struct GenArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Spatial mode override: normal, special or mixed.
    #[arg(long)]
    pub mode: Option<String>,
    /// Record count override.
    #[arg(long)]
    pub records: Option<usize>,
    /// Master seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Dataset file stem.
    #[arg(long, default_value = "dataset")]
    pub name: String,
    /// Also export the first N instances as standalone JSON documents
    /// (`<name>.instance.<i>.json`), ready for `solve` and `predict`.
    #[arg(long, default_value_t = 0)]
    pub instances: usize,
}

pub fn run(args: &GenArgs) -> Result<()> {
    let config = Config::load_or_default(args.config.as_deref())?;
    let mode = match &args.mode {
        Some(text) => parse_mode(text)?,
        None => config.mode,
    };
    let records = args.records.unwrap_or(config.records);
    let seed = args.seed.unwrap_or(config.seed);
    let out_dir = args.out_dir.clone().unwrap_or(config.paths.out_dir.clone());

    let spec = config.dataset_spec(mode, records);
    let dataset = generate_dataset(&spec, seed)?;
    dataset.save(&out_dir, &args.name)?;
    dataset.write_csv(&out_dir.join(format!("{}.features.csv", args.name)))?;

    // user/server coordinates for external plotting
    let mut locations = Vec::new();
    for (j, pos) in dataset.meta.server_layout.iter().enumerate() {
        locations.push(LocationRow {
            entity: "server".into(),
            record: None,
            index: j,
            x: pos.x,
            y: pos.y,
        });
    }
    for (i, record) in dataset.records.iter().enumerate() {
        let instance = dataset.meta.rebuild_instance(i, record)?;
        for user in &instance.users {
            locations.push(LocationRow {
                entity: "user".into(),
                record: Some(i),
                index: user.id,
                x: user.pos.x,
                y: user.pos.y,
            });
        }
    }
    write_rows(&out_dir.join(format!("{}.locations.csv", args.name)), &locations)?;

    for i in 0..args.instances.min(dataset.records.len()) {
        let instance = dataset.meta.rebuild_instance(i, &dataset.records[i])?;
        let path = out_dir.join(format!("{}.instance.{i}.json", args.name));
        std::fs::write(&path, instance.to_json()? + "\n")?;
    }

    let max_gap = dataset
        .records
        .iter()
        .map(|r| r.gap)
        .fold(0.0f64, f64::max);
    println!(
        "wrote {} {} records to {}/{}.jsonl (max label gap {:.4})",
        dataset.records.len(),
        mode,
        out_dir.display(),
        args.name,
        max_gap
    );
    Ok(())
}
