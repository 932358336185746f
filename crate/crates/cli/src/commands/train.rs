//! `edge-placer train`: per-user grid search (SVM or MLP) or the factorial
//! hyperparameter design over three mode datasets.

use std::path::{Path, PathBuf};

use clap::Args;

use edge_placer_core::dataset::{fit_scaler, Dataset};
use edge_placer_core::error::{Error, Result};
use edge_placer_core::learn::{
    full_factorial_design, grid_search, run_doe, scoped_rows, DoeModeData, DoeReport,
    FeatureScope, KernelKind, KernelSpec, MlpConfig, ModelConfig, SvmTrainConfig, TrainedModel,
    UserModelReport,
};
use edge_placer_core::world::SpatialMode;

use crate::bundle::{ModelBundle, BUNDLE_SCHEMA_VERSION};
use crate::commands::{load_dataset, split_dataset, SplitData};
use crate::config::Config;
use crate::reports::{
    pct, write_rows, DoeRunRow, DoeUserAccuracyRow, InfluenceRow, MainEffectRow, MlpGridRow,
    SelectedSettingRow, SvmGridRow,
};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Model family: svm-grid, mlp-grid or svm-doe.
    #[arg(long)]
    pub model: String,
    /// Dataset prefix (dir/name) for svm-grid and mlp-grid.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Normal-mode dataset prefix (svm-doe).
    #[arg(long)]
    pub dataset_normal: Option<PathBuf>,
    /// Special-mode dataset prefix (svm-doe).
    #[arg(long)]
    pub dataset_special: Option<PathBuf>,
    /// Mixed-mode dataset prefix (svm-doe).
    #[arg(long)]
    pub dataset_mixed: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory override.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output file stem.
    #[arg(long, default_value = "model")]
    pub name: String,
}

pub fn run(args: &TrainArgs) -> Result<()> {
    let config = Config::load_or_default(args.config.as_deref())?;
    let out_dir = args.out_dir.clone().unwrap_or(config.paths.out_dir.clone());
    std::fs::create_dir_all(&out_dir)?;
    match args.model.as_str() {
        "svm-grid" => run_svm_grid(args, &config, &out_dir),
        "mlp-grid" => run_mlp_grid(args, &config, &out_dir),
        "svm-doe" => run_svm_doe(args, &config, &out_dir),
        other => Err(Error::config(format!(
            "unknown model '{other}' (expected svm-grid, mlp-grid or svm-doe)"
        ))),
    }
}

/// The SVM grid in a fixed order: kernel, then gamma, then C. The linear
/// kernel ignores gamma, so it contributes one cell per C.
fn svm_grid(config: &Config) -> Vec<ModelConfig<f64>> {
    let svm = &config.learn.svm;
    let mut grid = Vec::new();
    for &kernel in &svm.kernels {
        let gammas: &[f64] = if kernel == KernelKind::Linear {
            &svm.gammas[..1]
        } else {
            &svm.gammas
        };
        for &gamma in gammas {
            for &c in &svm.cs {
                let mut spec = KernelSpec::with_kind(kernel, gamma);
                spec.degree = svm.poly_degree;
                if kernel == KernelKind::Poly || kernel == KernelKind::Sigmoid {
                    spec.coef0 = svm.poly_coef0;
                }
                grid.push(ModelConfig::Svm(SvmTrainConfig {
                    c,
                    kernel: spec,
                    tol: svm.tol,
                    max_passes: svm.max_passes,
                }));
            }
        }
    }
    grid
}

fn mlp_grid(config: &Config) -> Vec<ModelConfig<f64>> {
    let mlp = &config.learn.mlp;
    let mut grid = Vec::new();
    for hidden in &mlp.hidden_layouts {
        for &alpha in &mlp.alphas {
            let mut cell = MlpConfig::new(hidden.clone(), alpha);
            cell.activation = mlp.activation;
            cell.learning_rate = mlp.learning_rate;
            cell.momentum = mlp.momentum;
            cell.batch_size = mlp.batch_size;
            cell.max_epochs = mlp.max_epochs;
            cell.validation_fraction = mlp.validation_fraction;
            cell.patience = mlp.patience;
            cell.seed = config.learn.seed;
            grid.push(ModelConfig::Mlp(cell));
        }
    }
    grid
}

/// Run the per-user search under the configured feature scope. The returned
/// models expect rows scaled by the full-width scaler and sliced per scope.
fn run_scoped_grid(
    data: &SplitData,
    grid: &[ModelConfig<f64>],
    config: &Config,
    servers: usize,
) -> Result<(Vec<UserModelReport>, Vec<TrainedModel<f64>>)> {
    let scope = config.learn.feature_scope;
    let k = config.learn.cv_folds;
    let seed = config.learn.seed;
    match scope {
        FeatureScope::FullInstance => {
            let result = grid_search(
                &data.train_x,
                &data.train_labels,
                &data.test_x,
                &data.test_labels,
                grid,
                k,
                seed,
            )?;
            Ok((result.reports, result.models))
        }
        FeatureScope::PerUser => {
            let users = data.train_labels.len();
            let mut reports = Vec::with_capacity(users);
            let mut models = Vec::with_capacity(users);
            for user in 0..users {
                let train = scoped_rows(&data.train_x, scope, user, servers);
                let test = scoped_rows(&data.test_x, scope, user, servers);
                let result = grid_search(
                    &train,
                    std::slice::from_ref(&data.train_labels[user]),
                    &test,
                    std::slice::from_ref(&data.test_labels[user]),
                    grid,
                    k,
                    seed,
                )?;
                let mut report = result.reports.into_iter().next().unwrap();
                report.user = user;
                reports.push(report);
                models.push(result.models.into_iter().next().unwrap());
            }
            Ok((reports, models))
        }
    }
}

fn make_bundle(
    family: &str,
    dataset: &Dataset<f64>,
    data: &SplitData,
    models: Vec<TrainedModel<f64>>,
    scope: FeatureScope,
) -> Result<ModelBundle> {
    Ok(ModelBundle {
        version: BUNDLE_SCHEMA_VERSION,
        family: family.into(),
        users: dataset.meta.users,
        servers: dataset.meta.servers,
        feature_scope: scope,
        trained_on_mode: dataset.meta.mode,
        scaler: fit_scaler(&data.train_x)?,
        per_user: models,
    })
}

fn run_svm_grid(args: &TrainArgs, config: &Config, out_dir: &Path) -> Result<()> {
    let prefix = args
        .dataset
        .as_ref()
        .ok_or_else(|| Error::config("svm-grid needs --dataset"))?;
    let dataset = load_dataset(prefix)?;
    let data = split_dataset(&dataset, config.train_ratio, config.split_seed)?;
    let grid = svm_grid(config);
    let (reports, models) = run_scoped_grid(&data, &grid, config, dataset.meta.servers)?;

    let rows: Vec<SvmGridRow> = reports
        .iter()
        .map(|r| {
            let ModelConfig::Svm(cell) = &grid[r.config_index] else {
                unreachable!()
            };
            SvmGridRow {
                user: r.user,
                accuracy_pct: pct(r.test_accuracy),
                cv_mean_pct: pct(r.cv_mean),
                kernel: cell.kernel.kind.to_string(),
                gamma: cell.kernel.gamma,
                c: cell.c,
            }
        })
        .collect();
    write_rows(&out_dir.join(format!("{}.svm_grid.csv", args.name)), &rows)?;

    let bundle = make_bundle("svm", &dataset, &data, models, config.learn.feature_scope)?;
    bundle.save(&out_dir.join(format!("{}.bundle.json", args.name)))?;
    print_user_summary("svm-grid", &reports);
    Ok(())
}

fn run_mlp_grid(args: &TrainArgs, config: &Config, out_dir: &Path) -> Result<()> {
    let prefix = args
        .dataset
        .as_ref()
        .ok_or_else(|| Error::config("mlp-grid needs --dataset"))?;
    let dataset = load_dataset(prefix)?;
    let data = split_dataset(&dataset, config.train_ratio, config.split_seed)?;
    let grid = mlp_grid(config);
    let (reports, models) = run_scoped_grid(&data, &grid, config, dataset.meta.servers)?;

    let rows: Vec<MlpGridRow> = reports
        .iter()
        .map(|r| {
            let ModelConfig::Mlp(cell) = &grid[r.config_index] else {
                unreachable!()
            };
            let sizes: Vec<String> = cell.hidden_layers.iter().map(|s| s.to_string()).collect();
            MlpGridRow {
                user: r.user,
                accuracy_pct: pct(r.test_accuracy),
                cv_mean_pct: pct(r.cv_mean),
                hidden_layer_sizes: format!("({})", sizes.join(", ")),
                alpha: cell.alpha,
            }
        })
        .collect();
    write_rows(&out_dir.join(format!("{}.mlp_grid.csv", args.name)), &rows)?;

    let bundle = make_bundle("mlp", &dataset, &data, models, config.learn.feature_scope)?;
    bundle.save(&out_dir.join(format!("{}.bundle.json", args.name)))?;
    print_user_summary("mlp-grid", &reports);
    Ok(())
}

fn print_user_summary(label: &str, reports: &[UserModelReport]) {
    let min = reports
        .iter()
        .map(|r| r.test_accuracy)
        .fold(f64::INFINITY, f64::min);
    let avg = reports.iter().map(|r| r.test_accuracy).sum::<f64>() / reports.len().max(1) as f64;
    println!(
        "{label}: {} users, test accuracy min {:.1}% avg {:.1}%",
        reports.len(),
        pct(min),
        pct(avg)
    );
}

fn run_svm_doe(args: &TrainArgs, config: &Config, out_dir: &Path) -> Result<()> {
    let prefixes = match (&args.dataset_normal, &args.dataset_special, &args.dataset_mixed) {
        (Some(n), Some(s), Some(m)) => [n.clone(), s.clone(), m.clone()],
        _ => {
            return Err(Error::config(
                "svm-doe needs --dataset-normal, --dataset-special and --dataset-mixed",
            ))
        }
    };
    let expected_modes = [SpatialMode::Normal, SpatialMode::Special, SpatialMode::Mixed];
    let mut datasets = Vec::new();
    let mut splits = Vec::new();
    let mut inputs = Vec::new();
    for (prefix, &mode) in prefixes.iter().zip(&expected_modes) {
        let dataset = load_dataset(prefix)?;
        if dataset.meta.mode != mode {
            return Err(Error::config(format!(
                "dataset {} is {} data, expected {mode}",
                prefix.display(),
                dataset.meta.mode
            )));
        }
        let data = split_dataset(&dataset, config.train_ratio, config.split_seed)?;
        inputs.push(DoeModeData {
            mode,
            train_x: data.train_x.clone(),
            train_labels: data.train_labels.clone(),
            test_x: data.test_x.clone(),
            test_labels: data.test_labels.clone(),
            scope: config.learn.feature_scope,
            servers: dataset.meta.servers,
        });
        datasets.push(dataset);
        splits.push(data);
    }

    let design = full_factorial_design::<f64>();
    let template = SvmTrainConfig {
        c: 1.0,
        kernel: KernelSpec::poly(0.0001, config.learn.svm.poly_degree, config.learn.svm.poly_coef0),
        tol: config.learn.svm.tol,
        max_passes: config.learn.svm.max_passes,
    };
    let report = run_doe(&inputs, &design, &template)?;
    write_doe_reports(&report, args, out_dir)?;

    // one bundle per mode at the selected shared setting
    let selected_config = ModelConfig::Svm(SvmTrainConfig {
        c: report.selected.c,
        kernel: {
            let mut spec = KernelSpec::with_kind(report.selected.kernel, report.selected.gamma);
            spec.degree = config.learn.svm.poly_degree;
            spec.coef0 = config.learn.svm.poly_coef0;
            spec
        },
        tol: config.learn.svm.tol,
        max_passes: config.learn.svm.max_passes,
    });
    for (dataset, data) in datasets.iter().zip(&splits) {
        let scaler = fit_scaler(&data.train_x)?;
        let train_scaled = scaler.transform(&data.train_x);
        let scope = config.learn.feature_scope;
        let models: Result<Vec<TrainedModel<f64>>> = data
            .train_labels
            .iter()
            .enumerate()
            .map(|(user, labels)| {
                let rows = scoped_rows(&train_scaled, scope, user, dataset.meta.servers);
                edge_placer_core::learn::fit_model(&rows, labels, &selected_config)
            })
            .collect();
        let bundle = ModelBundle {
            version: BUNDLE_SCHEMA_VERSION,
            family: "svm".into(),
            users: dataset.meta.users,
            servers: dataset.meta.servers,
            feature_scope: scope,
            trained_on_mode: dataset.meta.mode,
            scaler,
            per_user: models?,
        };
        bundle.save(&out_dir.join(format!("{}.{}.bundle.json", args.name, dataset.meta.mode)))?;
    }

    println!(
        "svm-doe selected kernel {} gamma {} C {}",
        report.selected.kernel, report.selected.gamma, report.selected.c
    );
    for (idx, mode) in report.modes.iter().enumerate() {
        println!(
            "  {mode}: min {:.1}% avg {:.1}%",
            pct(report.selected_min[idx]),
            pct(report.selected_avg[idx])
        );
    }
    Ok(())
}

fn write_doe_reports(report: &DoeReport<f64>, args: &TrainArgs, out_dir: &Path) -> Result<()> {
    let run_rows: Vec<DoeRunRow> = report
        .runs
        .iter()
        .map(|r| DoeRunRow {
            id: r.run.id,
            kernel: r.run.kernel.to_string(),
            gamma: r.run.gamma,
            c: r.run.c,
            min_accuracy_normal_pct: pct(r.min_accuracy[0]),
            min_accuracy_special_pct: pct(r.min_accuracy[1]),
            min_accuracy_mixed_pct: pct(r.min_accuracy[2]),
        })
        .collect();
    write_rows(&out_dir.join(format!("{}.doe_runs.csv", args.name)), &run_rows)?;

    let effect_rows: Vec<MainEffectRow> = report
        .main_effects
        .iter()
        .map(|e| MainEffectRow {
            factor: e.factor.clone(),
            level: e.level.clone(),
            normal_pct: pct(e.per_mode[0]),
            special_pct: pct(e.per_mode[1]),
            mixed_pct: pct(e.per_mode[2]),
            overall_pct: pct(e.overall),
        })
        .collect();
    write_rows(
        &out_dir.join(format!("{}.doe_main_effects.csv", args.name)),
        &effect_rows,
    )?;

    let influence_rows: Vec<InfluenceRow> = report
        .influences
        .iter()
        .map(|i| InfluenceRow {
            factor: i.factor.clone(),
            range_normal_pct: pct(i.range_per_mode[0]),
            range_special_pct: pct(i.range_per_mode[1]),
            range_mixed_pct: pct(i.range_per_mode[2]),
            range_overall_pct: pct(i.range_overall),
        })
        .collect();
    write_rows(
        &out_dir.join(format!("{}.doe_influences.csv", args.name)),
        &influence_rows,
    )?;

    write_rows(
        &out_dir.join(format!("{}.doe_selected.csv", args.name)),
        &[SelectedSettingRow {
            kernel: report.selected.kernel.to_string(),
            gamma: report.selected.gamma,
            c: report.selected.c,
        }],
    )?;

    let users = report.selected_user_accuracy[0].len();
    let user_rows: Vec<DoeUserAccuracyRow> = (0..users)
        .map(|u| DoeUserAccuracyRow {
            user: u,
            normal_pct: pct(report.selected_user_accuracy[0][u]),
            special_pct: pct(report.selected_user_accuracy[1][u]),
            mixed_pct: pct(report.selected_user_accuracy[2][u]),
        })
        .collect();
    write_rows(
        &out_dir.join(format!("{}.doe_user_accuracy.csv", args.name)),
        &user_rows,
    )?;
    Ok(())
}
