//! `edge-placer bench`: time the exact solver on a size ladder against
//! surrogate inference, and project runs-per-shift totals.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use edge_placer_core::dataset::derive_seed;
use edge_placer_core::error::Result;
use edge_placer_core::solver::{solve_exact, SolveOptions, SolveStatus};
use edge_placer_core::world::{sample_instance, SampleSpec, SpatialMode};

use crate::bundle::ModelBundle;
use crate::config::Config;
use crate::reports::{write_rows, BenchRow, ProjectionRow};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Trained bundle used for inference timing (its shape must appear in
    /// the ladder).
    #[arg(long)]
    pub bundle: PathBuf,
    /// JSON run configuration (ladder, time limit, repetitions).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory override.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output file stem.
    #[arg(long, default_value = "bench")]
    pub name: String,
}

pub fn run(args: &BenchArgs) -> Result<()> {
    let config = Config::load_or_default(args.config.as_deref())?;
    let bundle = ModelBundle::load(&args.bundle)?;
    let out_dir = args.out_dir.clone().unwrap_or(config.paths.out_dir.clone());
    std::fs::create_dir_all(&out_dir)?;

    let bench = &config.bench;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut projections: Vec<ProjectionRow> = Vec::new();

    for (row_idx, &(users, servers, scenarios)) in bench.ladder.iter().enumerate() {
        let mut spec = SampleSpec::<f64>::new(SpatialMode::Normal, users, servers, scenarios);
        spec.grid = config.grid;
        spec.constants = config.model_constants();
        spec.energy_budget = config.constants.energy_budget;
        spec.capacity = config.constants.capacity;
        spec.request_range = config.request_range;
        let instance = sample_instance(&spec, derive_seed(bench.seed, row_idx as u64))?;

        let options = SolveOptions {
            time_limit: Some(bench.time_limit),
            gap_tolerance: config.solver.gap_tolerance,
            node_limit: None,
        };
        let result = solve_exact(&instance, &options)?;
        let status = match result.status {
            SolveStatus::Optimal => "optimal".to_string(),
            SolveStatus::Feasible => format!(">{}s", bench.time_limit),
            SolveStatus::Infeasible => "infeasible".to_string(),
        };
        // the time a consumer would wait: the wall clock, capped by the limit
        let solver_seconds = result.wall_time.min(bench.time_limit.max(result.wall_time));

        let matches_bundle = users == bundle.users && servers == bundle.servers;
        let (inference_seconds, speedup) = if matches_bundle {
            let probes: Vec<_> = (0..16)
                .map(|k| sample_instance(&spec, derive_seed(bench.seed ^ 0xbead, k)))
                .collect::<Result<Vec<_>>>()?;
            let reps = bench.inference_repetitions.max(1);
            let start = Instant::now();
            let mut guard = 0u32;
            for k in 0..reps {
                let choices = bundle.predict_instance(&probes[k % probes.len()])?;
                guard = guard.wrapping_add(choices.iter().sum::<u32>());
            }
            let mean = start.elapsed().as_secs_f64() / reps as f64;
            std::hint::black_box(guard);
            (Some(mean), Some(solver_seconds / mean))
        } else {
            (None, None)
        };

        if let Some(mean) = inference_seconds {
            projections.push(projection_row(
                "exact-solver",
                users,
                servers,
                scenarios,
                solver_seconds,
            ));
            projections.push(projection_row(
                "surrogate",
                users,
                servers,
                scenarios,
                mean,
            ));
        }

        println!(
            "{users}x{servers}x{scenarios}: solver {status} in {solver_seconds:.3}s{}",
            match inference_seconds {
                Some(mean) => format!(
                    ", inference {:.6}s/instance (x{:.0} faster)",
                    mean,
                    solver_seconds / mean
                ),
                None => String::new(),
            }
        );

        rows.push(BenchRow {
            users,
            servers,
            scenarios,
            solver_status: status,
            solver_seconds,
            solver_objective: result.objective,
            solver_gap: result.gap,
            inference_seconds,
            speedup,
        });
    }

    write_rows(&out_dir.join(format!("{}.csv", args.name)), &rows)?;
    write_rows(
        &out_dir.join(format!("{}.projection.csv", args.name)),
        &projections,
    )?;
    println!(
        "wrote {}/{}.csv and {}/{}.projection.csv",
        out_dir.display(),
        args.name,
        out_dir.display(),
        args.name
    );
    Ok(())
}

/// Total seconds for an 8-hour shift at the standard cadences
/// (480/15/10/8/5 minutes between runs).
fn projection_row(
    method: &str,
    users: usize,
    servers: usize,
    scenarios: usize,
    seconds_per_run: f64,
) -> ProjectionRow {
    ProjectionRow {
        method: method.into(),
        users,
        servers,
        scenarios,
        seconds_per_run,
        total_1_run: seconds_per_run,
        total_32_runs: seconds_per_run * 32.0,
        total_48_runs: seconds_per_run * 48.0,
        total_60_runs: seconds_per_run * 60.0,
        total_96_runs: seconds_per_run * 96.0,
    }
}
