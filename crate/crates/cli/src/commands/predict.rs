//! `edge-placer predict`: surrogate stage-1 allocation for one instance,
//! with a feasibility report and an optional greedy repair.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use edge_placer_core::error::{Error, Result};
use edge_placer_core::model::chosen_server;
use edge_placer_core::world::Instance;

use crate::bundle::ModelBundle;

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Trained bundle JSON.
    #[arg(long)]
    pub bundle: PathBuf,
    /// Instance JSON document.
    #[arg(long)]
    pub instance: PathBuf,
    /// Repair strategy for energy-infeasible predictions ("greedy").
    #[arg(long)]
    pub repair: Option<String>,
    /// Where to write the prediction JSON (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One overloaded server in a predicted allocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadViolation {
    pub server: usize,
    pub load: u64,
    pub max_load: u64,
    pub energy_overshoot: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub choices: Vec<u32>,
    pub evicted_users: Vec<usize>,
}

/// The document `predict` emits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionDocument {
    pub choices: Vec<u32>,
    pub feasible: bool,
    pub violations: Vec<LoadViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repaired: Option<RepairOutcome>,
}

fn server_loads(instance: &Instance<f64>, choices: &[u32]) -> Vec<u64> {
    let mut loads = vec![0u64; instance.num_servers()];
    for (user, &choice) in choices.iter().enumerate() {
        if let Some(j) = chosen_server(choice) {
            loads[j] += u64::from(instance.users[user].request);
        }
    }
    loads
}

fn find_violations(instance: &Instance<f64>, choices: &[u32]) -> Vec<LoadViolation> {
    let max_loads = instance.max_loads();
    server_loads(instance, choices)
        .into_iter()
        .enumerate()
        .filter(|&(j, load)| load > max_loads[j])
        .map(|(j, load)| {
            let server = &instance.servers[j];
            LoadViolation {
                server: j,
                load,
                max_load: max_loads[j],
                energy_overshoot: instance.constants.sigma * load as f64 / server.capacity
                    - server.energy_budget,
            }
        })
        .collect()
}

/// Evict the lowest-QoS users from each overloaded server until its energy
/// budget holds.
fn greedy_repair(instance: &Instance<f64>, choices: &[u32]) -> RepairOutcome {
    let max_loads = instance.max_loads();
    let mut repaired = choices.to_vec();
    let mut evicted = Vec::new();
    let mut loads = server_loads(instance, &repaired);
    for j in 0..instance.num_servers() {
        while loads[j] > max_loads[j] {
            let victim = repaired
                .iter()
                .enumerate()
                .filter(|(_, &c)| chosen_server(c) == Some(j))
                .min_by(|(a, _), (b, _)| {
                    instance
                        .stage1_qos(*a, j)
                        .partial_cmp(&instance.stage1_qos(*b, j))
                        .unwrap()
                        .then(a.cmp(b))
                })
                .map(|(user, _)| user)
                .expect("overloaded server has at least one user");
            repaired[victim] = 0;
            loads[j] -= u64::from(instance.users[victim].request);
            evicted.push(victim);
        }
    }
    RepairOutcome {
        choices: repaired,
        evicted_users: evicted,
    }
}

pub fn run(args: &PredictArgs) -> Result<()> {
    let bundle = ModelBundle::load(&args.bundle)?;
    let text = fs::read_to_string(&args.instance)?;
    let instance: Instance<f64> = Instance::from_json(&text)?;

    let choices = bundle.predict_instance(&instance)?;
    let violations = find_violations(&instance, &choices);
    let feasible = violations.is_empty();

    let repaired = match args.repair.as_deref() {
        Some("greedy") if !feasible => Some(greedy_repair(&instance, &choices)),
        Some("greedy") | None => None,
        Some(other) => {
            return Err(Error::config(format!(
                "unknown repair strategy '{other}' (expected greedy)"
            )))
        }
    };

    let document = PredictionDocument {
        choices,
        feasible,
        violations,
        repaired,
    };
    let json = serde_json::to_string_pretty(&document)? + "\n";
    match &args.out {
        Some(path) => {
            fs::write(path, &json)?;
            println!(
                "prediction {} ({} violations) written to {}",
                if document.feasible { "feasible" } else { "infeasible" },
                document.violations.len(),
                path.display()
            );
        }
        None => print!("{json}"),
    }
    Ok(())
}
