//! `edge-placer solve`: exactly solve one instance file.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use edge_placer_core::error::Result;
use edge_placer_core::model::{evaluate, export_mps};
use edge_placer_core::solver::{solve_exact, SolveOptions, SolveStatus};
use edge_placer_core::world::Instance;

use crate::config::Config;

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance JSON document.
    #[arg(long)]
    pub instance: PathBuf,
    /// JSON run configuration (supplies solver limits when set).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Relative optimality gap to accept.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Deterministic node budget.
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Where to write the solution JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Export the deterministic equivalent in MPS format.
    #[arg(long)]
    pub export_mps: Option<PathBuf>,
}

pub fn run(args: &SolveArgs) -> Result<()> {
    let text = fs::read_to_string(&args.instance)?;
    let instance: Instance<f64> = Instance::from_json(&text)?;

    // bare `solve` proves optimality; a config supplies its own limits
    let mut options = match &args.config {
        Some(path) => Config::load(path)?.solver,
        None => SolveOptions::default(),
    };
    if args.time_limit.is_some() {
        options.time_limit = args.time_limit;
    }
    if let Some(gap) = args.gap {
        options.gap_tolerance = gap;
    }
    if args.node_limit.is_some() {
        options.node_limit = args.node_limit;
    }

    if let Some(path) = &args.export_mps {
        fs::write(path, export_mps(&instance)?)?;
        println!("wrote MPS model to {}", path.display());
    }

    let result = solve_exact(&instance, &options)?;
    let breakdown = evaluate(&instance, &result.x1, &result.x2)?;

    let status = match result.status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible (limit reached)",
        SolveStatus::Infeasible => "infeasible",
    };
    println!("status:                  {status}");
    println!("objective:               {:.6}", result.objective);
    println!("  stage-1 qos:           {:.6}", breakdown.stage1_qos);
    println!("  expected stage-2 qos:  {:.6}", breakdown.expected_stage2_qos);
    println!(
        "  expected migration:    {:.6}",
        breakdown.expected_migration_cost
    );
    println!("best bound:              {:.6}", result.best_bound);
    println!("gap:                     {:.6}", result.gap);
    println!("nodes:                   {}", result.nodes_explored);
    println!("wall time:               {:.3}s", result.wall_time);

    if let Some(path) = &args.out {
        fs::write(path, serde_json::to_string_pretty(&result)? + "\n")?;
        println!("wrote solution to {}", path.display());
    }
    Ok(())
}
