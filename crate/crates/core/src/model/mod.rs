//! Deterministic-equivalent encoding of the two-stage placement program:
//! objective evaluation, migration derivation, feasibility checking, and MPS
//! export for external solvers.

mod mps;

pub use mps::export_mps;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::world::Instance;

/// Sentinel choice value meaning "not assigned to any server".
pub const UNASSIGNED: u32 = 0;

/// Convert a choice value in {0..S} to an optional 0-based server index.
#[inline]
pub fn chosen_server(choice: u32) -> Option<usize> {
    (choice != UNASSIGNED).then(|| choice as usize - 1)
}

/// Convert an optional 0-based server index to a choice value.
#[inline]
pub fn choice_of(server: Option<usize>) -> u32 {
    match server {
        Some(j) => j as u32 + 1,
        None => UNASSIGNED,
    }
}

/// First-stage allocation: one choice in {0..S} per user (0 = unassigned).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage1Assignment {
    pub choice: Vec<u32>,
}

impl Stage1Assignment {
    pub fn unassigned(users: usize) -> Self {
        Stage1Assignment {
            choice: vec![UNASSIGNED; users],
        }
    }

    pub fn server_of(&self, user: usize) -> Option<usize> {
        chosen_server(self.choice[user])
    }
}

/// Second-stage allocation: one choice in {0..S} per (scenario, user).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage2Assignment {
    /// Row per scenario, column per user.
    pub choice: Vec<Vec<u32>>,
}

impl Stage2Assignment {
    pub fn unassigned(scenarios: usize, users: usize) -> Self {
        Stage2Assignment {
            choice: vec![vec![UNASSIGNED; users]; scenarios],
        }
    }

    pub fn server_of(&self, scenario: usize, user: usize) -> Option<usize> {
        chosen_server(self.choice[scenario][user])
    }
}

/// A single derived migration: user moved from one server to another between
/// the stages of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Migration {
    pub scenario: usize,
    pub user: usize,
    pub from: usize,
    pub to: usize,
}

/// All migrations implied by a pair of assignments.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MigrationMatrix {
    pub moved: Vec<Migration>,
}

/// Objective value split into its three components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown<T> {
    pub stage1_qos: T,
    pub expected_stage2_qos: T,
    pub expected_migration_cost: T,
    pub total: T,
}

/// Constraint families of the program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintId {
    /// Stage-1 per-server energy budget.
    Stage1Energy = 4,
    /// Stage-2 per-server energy budget in one scenario.
    Stage2Energy = 5,
    /// At most one stage-1 server per user.
    Stage1AtMostOne = 6,
    /// At most one stage-2 server per user per scenario.
    Stage2AtMostOne = 7,
    /// Users served in stage 1 stay served in every scenario.
    Coverage = 8,
    /// Migration linking between the stages.
    MigrationLink = 9,
    /// Binary domain of the decision variables.
    Binary = 10,
}

/// One feasibility violation with enough indices to locate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation<T> {
    pub constraint: ConstraintId,
    pub scenario: Option<usize>,
    pub server: Option<usize>,
    pub user: Option<usize>,
    /// How far past the constraint the candidate sits, in the constraint's
    /// native units (energy overshoot for 4/5, count for the rest).
    pub magnitude: T,
}

/// Every violation of constraints 4-10 found in a candidate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViolationReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> ViolationReport<T> {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_dims<T: Scalar>(
    instance: &Instance<T>,
    x1: &Stage1Assignment,
    x2: &Stage2Assignment,
) -> Result<()> {
    let users = instance.num_users();
    if x1.choice.len() != users {
        return Err(Error::dimension(format!(
            "stage-1 assignment covers {} users, instance has {users}",
            x1.choice.len()
        )));
    }
    if x2.choice.len() != instance.num_scenarios() {
        return Err(Error::dimension(format!(
            "stage-2 assignment covers {} scenarios, instance has {}",
            x2.choice.len(),
            instance.num_scenarios()
        )));
    }
    if let Some(row) = x2.choice.iter().find(|row| row.len() != users) {
        return Err(Error::dimension(format!(
            "stage-2 scenario row covers {} users, instance has {users}",
            row.len()
        )));
    }
    let servers = instance.num_servers() as u32;
    let valid = |c: &u32| *c <= servers;
    if !x1.choice.iter().all(valid) || !x2.choice.iter().flatten().all(valid) {
        return Err(Error::dimension(
            "assignment references a server index outside the instance",
        ));
    }
    Ok(())
}

/// Net second-stage value of serving user `i` from server `j` in scenario `s`,
/// given the user's stage-1 server: QoS minus any migration cost.
pub(crate) fn stage2_net_value<T: Scalar>(
    instance: &Instance<T>,
    user: usize,
    server: usize,
    scenario: usize,
    stage1_server: Option<usize>,
) -> T {
    let q = instance.stage2_qos(user, server, scenario);
    match stage1_server {
        Some(from) => q - instance.constants.rho.cost(from, server),
        None => q,
    }
}

/// Per-scenario objective contribution (QoS minus migration) of a stage-2 row,
/// summed over users in index order. Both solvers compare candidate rows with
/// this exact fold so ties resolve identically.
pub(crate) fn scenario_value<T: Scalar>(
    instance: &Instance<T>,
    x1: &Stage1Assignment,
    row: &[u32],
    scenario: usize,
) -> T {
    let mut value = T::zero();
    for (user, &choice) in row.iter().enumerate() {
        if let Some(server) = chosen_server(choice) {
            value = value + stage2_net_value(instance, user, server, scenario, x1.server_of(user));
        }
    }
    value
}

/// Evaluate the objective of a candidate solution. The expectation weighs each
/// scenario by its probability; migrations are derived, not supplied.
pub fn evaluate<T: Scalar>(
    instance: &Instance<T>,
    x1: &Stage1Assignment,
    x2: &Stage2Assignment,
) -> Result<ObjectiveBreakdown<T>> {
    check_dims(instance, x1, x2)?;

    let mut stage1_qos = T::zero();
    for (user, &choice) in x1.choice.iter().enumerate() {
        if let Some(server) = chosen_server(choice) {
            stage1_qos = stage1_qos + instance.stage1_qos(user, server);
        }
    }

    let mut expected_stage2_qos = T::zero();
    let mut expected_migration_cost = T::zero();
    for (scenario, row) in x2.choice.iter().enumerate() {
        let p = instance.scenario_prob(scenario);
        let mut qos_sum = T::zero();
        let mut migration_sum = T::zero();
        for (user, &choice) in row.iter().enumerate() {
            if let Some(server) = chosen_server(choice) {
                qos_sum = qos_sum + instance.stage2_qos(user, server, scenario);
                if let Some(from) = x1.server_of(user) {
                    if from != server {
                        migration_sum = migration_sum + instance.constants.rho.cost(from, server);
                    }
                }
            }
        }
        expected_stage2_qos = expected_stage2_qos + p * qos_sum;
        expected_migration_cost = expected_migration_cost + p * migration_sum;
    }

    Ok(ObjectiveBreakdown {
        stage1_qos,
        expected_stage2_qos,
        expected_migration_cost,
        total: stage1_qos + expected_stage2_qos - expected_migration_cost,
    })
}

/// Derive the unique minimal migration variables implied by a pair of
/// assignments: an entry exists iff the user is on different actual servers
/// in the two stages.
pub fn derive_migrations(x1: &Stage1Assignment, x2: &Stage2Assignment) -> MigrationMatrix {
    let mut moved = Vec::new();
    for (scenario, row) in x2.choice.iter().enumerate() {
        for (user, &choice) in row.iter().enumerate() {
            if let (Some(from), Some(to)) = (x1.server_of(user), chosen_server(choice)) {
                if from != to {
                    moved.push(Migration {
                        scenario,
                        user,
                        from,
                        to,
                    });
                }
            }
        }
    }
    MigrationMatrix { moved }
}

/// Check constraints 4-8 (6, 7 and 10 hold structurally for the compact
/// choice encoding but are still reported if an out-of-range value slips in
/// through `choice` manipulation). Energy comparisons use the exact integer
/// load limits so boundary loads never trip a spurious violation.
pub fn check_feasible<T: Scalar>(
    instance: &Instance<T>,
    x1: &Stage1Assignment,
    x2: &Stage2Assignment,
) -> Result<ViolationReport<T>> {
    check_dims(instance, x1, x2)?;
    let mut violations = Vec::new();
    let max_loads = instance.max_loads();
    let servers = instance.num_servers();

    let energy_overshoot = |load: u64, j: usize| -> T {
        let sigma = instance.constants.sigma;
        let q = instance.servers[j].capacity;
        let e = instance.servers[j].energy_budget;
        sigma * T::from_f64_lossy(load as f64) / q - e
    };

    // constraint 4: stage-1 energy per server
    let mut load1 = vec![0u64; servers];
    for (user, &choice) in x1.choice.iter().enumerate() {
        if let Some(j) = chosen_server(choice) {
            load1[j] += u64::from(instance.users[user].request);
        }
    }
    for (j, &load) in load1.iter().enumerate() {
        if load > max_loads[j] {
            violations.push(Violation {
                constraint: ConstraintId::Stage1Energy,
                scenario: None,
                server: Some(j),
                user: None,
                magnitude: energy_overshoot(load, j),
            });
        }
    }

    // constraint 5: stage-2 energy per server per scenario
    for (scenario, row) in x2.choice.iter().enumerate() {
        let mut load2 = vec![0u64; servers];
        for (user, &choice) in row.iter().enumerate() {
            if let Some(j) = chosen_server(choice) {
                load2[j] += u64::from(instance.users[user].request);
            }
        }
        for (j, &load) in load2.iter().enumerate() {
            if load > max_loads[j] {
                violations.push(Violation {
                    constraint: ConstraintId::Stage2Energy,
                    scenario: Some(scenario),
                    server: Some(j),
                    user: None,
                    magnitude: energy_overshoot(load, j),
                });
            }
        }
    }

    // constraint 8: served in stage 1 implies served in every scenario
    for (user, &choice) in x1.choice.iter().enumerate() {
        if chosen_server(choice).is_some() {
            for (scenario, row) in x2.choice.iter().enumerate() {
                if chosen_server(row[user]).is_none() {
                    violations.push(Violation {
                        constraint: ConstraintId::Coverage,
                        scenario: Some(scenario),
                        server: None,
                        user: Some(user),
                        magnitude: T::one(),
                    });
                }
            }
        }
    }

    Ok(ViolationReport { violations })
}

#[cfg(test)]
mod tests;
