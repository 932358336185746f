//! `edge-placer eval`: score a trained bundle against a dataset split.

use std::path::PathBuf;

use clap::Args;

use edge_placer_core::dataset::split;
use edge_placer_core::error::{Error, Result};

use crate::bundle::ModelBundle;
use crate::commands::load_dataset;
use crate::config::Config;
use crate::reports::{pct, write_rows, EvalSummaryRow, EvalUserRow};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Trained bundle JSON.
    #[arg(long)]
    pub bundle: PathBuf,
    /// Dataset prefix (dir/name).
    #[arg(long)]
    pub dataset: PathBuf,
    /// JSON run configuration (split ratio and seed).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rows to score: test, train or full.
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Summary CSV path (a `.users.csv` detail file lands next to it).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let config = Config::load_or_default(args.config.as_deref())?;
    let bundle = ModelBundle::load(&args.bundle)?;
    let dataset = load_dataset(&args.dataset)?;
    if dataset.meta.users != bundle.users || dataset.meta.servers != bundle.servers {
        return Err(Error::dimension(format!(
            "bundle is for {}x{}, dataset is {}x{}",
            bundle.users, bundle.servers, dataset.meta.users, dataset.meta.servers
        )));
    }

    let indices: Vec<usize> = match args.split.as_str() {
        "full" => (0..dataset.records.len()).collect(),
        part @ ("train" | "test") => {
            let s = split(dataset.records.len(), config.train_ratio, config.split_seed)?;
            if part == "train" {
                s.train
            } else {
                s.test
            }
        }
        other => {
            return Err(Error::config(format!(
                "unknown split '{other}' (expected test, train or full)"
            )))
        }
    };
    if args.split != "test" {
        eprintln!(
            "warning: scoring '{}' rows overlaps the training data; accuracies are optimistically biased",
            args.split
        );
    }

    let users = bundle.users;
    let mut correct = vec![0usize; users];
    for &i in &indices {
        let record = &dataset.records[i];
        let predicted = bundle.predict_features(&record.features);
        for u in 0..users {
            if predicted[u] == record.labels[u] {
                correct[u] += 1;
            }
        }
    }
    let per_user: Vec<f64> = correct
        .iter()
        .map(|&c| c as f64 / indices.len().max(1) as f64)
        .collect();
    let min = per_user.iter().copied().fold(f64::INFINITY, f64::min);
    let avg = per_user.iter().sum::<f64>() / users as f64;

    let summary = EvalSummaryRow {
        model: bundle.family.clone(),
        situation: dataset.meta.mode.to_string(),
        min_accuracy_pct: pct(min),
        average_accuracy_pct: pct(avg),
    };
    println!(
        "{} on {} ({} rows): min {:.1}% avg {:.1}%",
        summary.model,
        summary.situation,
        indices.len(),
        summary.min_accuracy_pct,
        summary.average_accuracy_pct
    );

    if let Some(out) = &args.out {
        write_rows(out, &[summary])?;
        let user_rows: Vec<EvalUserRow> = per_user
            .iter()
            .enumerate()
            .map(|(user, &a)| EvalUserRow {
                user,
                accuracy_pct: pct(a),
            })
            .collect();
        let detail = out.with_extension("users.csv");
        write_rows(&detail, &user_rows)?;
        println!("wrote {} and {}", out.display(), detail.display());
    }
    Ok(())
}
