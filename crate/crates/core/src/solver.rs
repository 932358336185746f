//! Exact solver for the two-stage placement program.
//!
//! The outer branch-and-bound searches stage-1 choices user by user; every
//! surviving stage-1 leaf decomposes into independent per-scenario
//! generalized-assignment subproblems solved by an inner branch-and-bound.
//! A brute-force enumerator over the same branching order serves as the test
//! oracle on tiny instances.
//!
//! Determinism contract: candidate values are always accumulated through the
//! same folds ([`candidate_total`], [`crate::model::scenario_value`]) and both
//! solvers visit choices in the same precomputed order, so equal-valued optima
//! tie-break identically. Pruning uses slightly inflated bounds
//! ([`certify`]) so a bound computed in a different summation order can never
//! cut off a candidate that compares strictly greater than the incumbent.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    check_feasible, chosen_server, evaluate, scenario_value, stage2_net_value, Stage1Assignment,
    Stage2Assignment,
};
use crate::scalar::Scalar;
use crate::world::Instance;

/// Default work budget for [`brute_force`]: (S+1)^U * |SC| * (S+1)^U must not
/// exceed it.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Search limits. All default to "unlimited" with a zero gap (prove
/// optimality).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Wall-clock limit in seconds. Limits degrade the status, never error.
    pub time_limit: Option<f64>,
    /// Relative optimality gap below which subtrees are abandoned.
    pub gap_tolerance: f64,
    /// Deterministic limit on explored nodes (outer and inner combined).
    pub node_limit: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: None,
            gap_tolerance: 0.0,
            node_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.gap_tolerance < 0.0 || !self.gap_tolerance.is_finite() {
            return Err(Error::config("gap tolerance must be finite and >= 0"));
        }
        Ok(())
    }
}

/// How a solve terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Search space exhausted within the requested gap tolerance.
    Optimal,
    /// A feasible incumbent returned after hitting a time or node limit.
    Feasible,
    /// No feasible solution (unreachable for this model: the empty assignment
    /// is always feasible).
    Infeasible,
}

/// Solution plus proof data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult<T> {
    pub x1: Stage1Assignment,
    pub x2: Stage2Assignment,
    pub objective: T,
    pub best_bound: T,
    /// (best_bound - objective) / max(1, |best_bound|)
    pub gap: T,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    /// Wall-clock seconds; excluded from serialized artifacts so files stay
    /// byte-deterministic.
    #[serde(skip)]
    pub wall_time: f64,
}

/// Inflate a bound by a tiny relative slack so that pruning against it is
/// conservative across float summation orders.
fn certify<T: Scalar>(bound: T) -> T {
    let eps = T::from_f64_lossy(1e-9).max(T::epsilon() * T::from_count(16));
    bound + eps * bound.abs().max(T::one())
}

/// Precomputed value tables shared by the exact solver and the brute-force
/// oracle. The choice orders stored here define the canonical tie-break.
struct Tables<T> {
    users: usize,
    servers: usize,
    scenarios: usize,
    prob: Vec<T>,
    requests: Vec<u64>,
    max_loads: Vec<u64>,
    /// Per-user stage-1 qos by server.
    q1: Vec<Vec<T>>,
    /// Stage-1 branching order: choices {1..S, 0} sorted by immediate qos
    /// descending, ties by server index, unassigned last.
    stage1_order: Vec<Vec<(u32, T)>>,
    /// `net_order[s][i][c]`: stage-2 choices ordered by net value (qos minus
    /// migration from stage-1 choice `c`), same tie rule. The unassigned
    /// option appears only when `c == 0`.
    net_order: Vec<Vec<Vec<Vec<(u32, T)>>>>,
    /// Best stage-2 net value per (scenario, user, stage-1 choice).
    net_best: Vec<Vec<Vec<T>>>,
    /// Expected stage-2 bound per (user, stage-1 choice).
    delta2: Vec<Vec<T>>,
    /// Optimistic per-user mass for undecided users (stage 1 plus stage 2).
    suffix: Vec<T>,
    /// Requests as scalars (for fractional-knapsack bounds).
    request_t: Vec<T>,
    /// Total pooled capacity over all servers, as a scalar.
    pool: T,
    /// Best stage-1 qos per user.
    m1: Vec<T>,
    /// Users ordered by stage-1 value density (m1 / request) descending.
    density1_order: Vec<usize>,
    /// Per scenario: users ordered by unconstrained stage-2 value density.
    density2_order: Vec<Vec<usize>>,
}

fn order_key(choice: u32) -> u32 {
    // servers by index, unassigned after every server
    if choice == 0 {
        u32::MAX
    } else {
        choice
    }
}

fn sort_choices<T: Scalar>(entries: &mut [(u32, T)]) {
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite values")
            .then_with(|| order_key(a.0).cmp(&order_key(b.0)))
    });
}

impl<T: Scalar> Tables<T> {
    fn build(instance: &Instance<T>) -> Self {
        let users = instance.num_users();
        let servers = instance.num_servers();
        let scenarios = instance.num_scenarios();
        let prob: Vec<T> = (0..scenarios).map(|s| instance.scenario_prob(s)).collect();
        let requests: Vec<u64> = instance
            .users
            .iter()
            .map(|u| u64::from(u.request))
            .collect();
        let max_loads = instance.max_loads();

        let q1: Vec<Vec<T>> = (0..users)
            .map(|i| (0..servers).map(|j| instance.stage1_qos(i, j)).collect())
            .collect();

        let stage1_order: Vec<Vec<(u32, T)>> = (0..users)
            .map(|i| {
                let mut entries: Vec<(u32, T)> = (0..servers)
                    .map(|j| (j as u32 + 1, q1[i][j]))
                    .collect();
                entries.push((0, T::zero()));
                sort_choices(&mut entries);
                entries
            })
            .collect();

        let mut net_order = vec![vec![Vec::new(); users]; scenarios];
        let mut net_best = vec![vec![vec![T::zero(); servers + 1]; users]; scenarios];
        for s in 0..scenarios {
            for i in 0..users {
                let mut per_choice = Vec::with_capacity(servers + 1);
                for c in 0..=servers {
                    let stage1 = if c == 0 { None } else { Some(c - 1) };
                    let mut entries: Vec<(u32, T)> = (0..servers)
                        .map(|j| (j as u32 + 1, stage2_net_value(instance, i, j, s, stage1)))
                        .collect();
                    if c == 0 {
                        entries.push((0, T::zero()));
                    }
                    sort_choices(&mut entries);
                    net_best[s][i][c] = entries[0].1;
                    per_choice.push(entries);
                }
                net_order[s][i] = per_choice;
            }
        }

        let mut delta2 = vec![vec![T::zero(); servers + 1]; users];
        for (i, row) in delta2.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                let mut acc = T::zero();
                for s in 0..scenarios {
                    acc = acc + prob[s] * net_best[s][i][c];
                }
                *cell = acc;
            }
        }

        let mut suffix = vec![T::zero(); users + 1];
        for i in (0..users).rev() {
            let best1 = stage1_order[i][0].1;
            suffix[i] = best1 + delta2[i][0] + suffix[i + 1];
        }

        let request_t: Vec<T> = requests
            .iter()
            .map(|&r| T::from_f64_lossy(r as f64))
            .collect();
        let pool = max_loads
            .iter()
            .fold(T::zero(), |acc, &l| acc + T::from_f64_lossy(l as f64));
        let m1: Vec<T> = (0..users).map(|i| stage1_order[i][0].1).collect();

        let density_order = |value_of: &dyn Fn(usize) -> T| -> Vec<usize> {
            let mut order: Vec<usize> = (0..users).collect();
            order.sort_by(|&a, &b| {
                let da = value_of(a) / request_t[a];
                let db = value_of(b) / request_t[b];
                db.partial_cmp(&da).expect("finite densities").then(a.cmp(&b))
            });
            order
        };
        let density1_order = density_order(&|i| m1[i]);
        let density2_order: Vec<Vec<usize>> = (0..scenarios)
            .map(|s| density_order(&|i| net_best[s][i][0]))
            .collect();

        Tables {
            users,
            servers,
            scenarios,
            prob,
            requests,
            max_loads,
            q1,
            stage1_order,
            net_order,
            net_best,
            delta2,
            suffix,
            request_t,
            pool,
            m1,
            density1_order,
            density2_order,
        }
    }

    /// Fractional-knapsack bound on the stage-1 value of users `depth..U`
    /// packed into the pooled remaining capacity.
    fn stage1_pooled(&self, depth: usize, used: T) -> T {
        let mut cap = self.pool - used;
        let mut acc = T::zero();
        if cap <= T::zero() {
            return acc;
        }
        for &i in &self.density1_order {
            if i < depth {
                continue;
            }
            let r = self.request_t[i];
            let v = self.m1[i];
            if cap >= r {
                acc = acc + v;
                cap = cap - r;
                if cap <= T::zero() {
                    break;
                }
            } else {
                acc = acc + v * cap / r;
                break;
            }
        }
        acc
    }

    /// Pooled-capacity bound on one scenario's recourse value given the
    /// decided stage-1 prefix: users assigned in stage 1 are served for sure,
    /// everyone else fills the remaining pool greedily by density.
    fn scenario_pooled(&self, scenario: usize, x1_prefix: &[u32]) -> T {
        let mut base = T::zero();
        let mut cap = self.pool;
        for (i, &c) in x1_prefix.iter().enumerate() {
            if chosen_server(c).is_some() {
                base = base + self.net_best[scenario][i][c as usize];
                cap = cap - self.request_t[i];
            }
        }
        if cap <= T::zero() {
            return base;
        }
        for &i in &self.density2_order[scenario] {
            if i < x1_prefix.len() && chosen_server(x1_prefix[i]).is_some() {
                continue; // already served as mandatory
            }
            let v = self.net_best[scenario][i][0];
            if v <= T::zero() {
                break; // density order: nothing positive remains
            }
            let r = self.request_t[i];
            if cap >= r {
                base = base + v;
                cap = cap - r;
                if cap <= T::zero() {
                    break;
                }
            } else {
                base = base + v * cap / r;
                break;
            }
        }
        base
    }

    /// Expected pooled stage-2 bound over all scenarios.
    fn stage2_pooled(&self, x1_prefix: &[u32]) -> T {
        let mut acc = T::zero();
        for s in 0..self.scenarios {
            acc = acc + self.prob[s] * self.scenario_pooled(s, x1_prefix);
        }
        acc
    }

    fn q1_of(&self, user: usize, choice: u32) -> T {
        match chosen_server(choice) {
            Some(j) => self.q1[user][j],
            None => T::zero(),
        }
    }
}

/// Stage-1 value of an assignment, folded over users in index order.
fn stage1_value<T: Scalar>(tables: &Tables<T>, x1: &[u32]) -> T {
    let mut acc = T::zero();
    for (i, &c) in x1.iter().enumerate() {
        if chosen_server(c).is_some() {
            acc = acc + tables.q1_of(i, c);
        }
    }
    acc
}

/// Canonical candidate value both solvers compare incumbents with:
/// stage-1 fold, then `+ p_s * scenario_value` in scenario order.
fn candidate_total<T: Scalar>(
    instance: &Instance<T>,
    tables: &Tables<T>,
    x1: &Stage1Assignment,
    rows: &[Vec<u32>],
) -> T {
    let mut acc = stage1_value(tables, &x1.choice);
    for (s, row) in rows.iter().enumerate() {
        acc = acc + tables.prob[s] * scenario_value(instance, x1, row, s);
    }
    acc
}

struct SearchState<T> {
    start: Instant,
    deadline: Option<f64>,
    node_limit: Option<u64>,
    gap_tolerance: f64,
    nodes: u64,
    aborted: bool,
    /// Certified bound over every abandoned region that might exceed the
    /// incumbent.
    ceiling: Option<T>,
    inc_total: T,
    inc_x1: Vec<u32>,
    inc_rows: Vec<Vec<u32>>,
}

impl<T: Scalar> SearchState<T> {
    fn new(users: usize, scenarios: usize, options: &SolveOptions) -> Self {
        SearchState {
            start: Instant::now(),
            deadline: options.time_limit,
            node_limit: options.node_limit,
            gap_tolerance: options.gap_tolerance,
            nodes: 0,
            aborted: false,
            ceiling: None,
            inc_total: T::zero(),
            inc_x1: vec![0; users],
            inc_rows: vec![vec![0; users]; scenarios],
        }
    }

    /// Count one node; flip to aborted when a limit trips.
    fn tick(&mut self) {
        self.nodes += 1;
        if let Some(limit) = self.node_limit {
            if self.nodes >= limit {
                self.aborted = true;
            }
        }
        if self.nodes & 0xFF == 0 {
            if let Some(limit) = self.deadline {
                if self.start.elapsed().as_secs_f64() >= limit {
                    self.aborted = true;
                }
            }
        }
    }

    /// Prune threshold: incumbent value plus the absolute form of the
    /// relative gap tolerance.
    fn threshold(&self) -> T {
        if self.gap_tolerance > 0.0 {
            self.inc_total
                + T::from_f64_lossy(self.gap_tolerance) * self.inc_total.abs().max(T::one())
        } else {
            self.inc_total
        }
    }

    fn raise_ceiling(&mut self, bound: T) {
        if bound > self.inc_total {
            self.ceiling = Some(match self.ceiling {
                Some(c) => c.max(bound),
                None => bound,
            });
        }
    }
}

/// Inner branch-and-bound: per-scenario generalized assignment given a full
/// stage-1 vector. Returns the first optimum in canonical visit order, or
/// `None` when infeasible or aborted.
fn solve_scenario_bb<T: Scalar>(
    instance: &Instance<T>,
    tables: &Tables<T>,
    state: &mut SearchState<T>,
    scenario: usize,
    x1: &[u32],
) -> Option<(Vec<u32>, T)> {
    let users = tables.users;
    // optimistic per-user suffix for this leaf's stage-1 choices, plus the
    // forced value and load of the remaining stage-1-assigned users
    let mut suffix_best = vec![T::zero(); users + 1];
    let mut mand_value = vec![T::zero(); users + 1];
    let mut mand_load = vec![T::zero(); users + 1];
    for i in (0..users).rev() {
        suffix_best[i] = tables.net_best[scenario][i][x1[i] as usize] + suffix_best[i + 1];
        if chosen_server(x1[i]).is_some() {
            mand_value[i] = tables.net_best[scenario][i][x1[i] as usize] + mand_value[i + 1];
            mand_load[i] = tables.request_t[i] + mand_load[i + 1];
        } else {
            mand_value[i] = mand_value[i + 1];
            mand_load[i] = mand_load[i + 1];
        }
    }

    struct Ctx<'a, T> {
        tables: &'a Tables<T>,
        scenario: usize,
        suffix_best: &'a [T],
        mand_value: &'a [T],
        mand_load: &'a [T],
        x1: &'a [u32],
        users: usize,
        best: Option<(Vec<u32>, T)>,
    }

    impl<T: Scalar> Ctx<'_, T> {
        /// Pooled-capacity bound on the remaining users: forced stage-1
        /// holders plus a greedy fractional fill of the optional ones.
        fn refined_suffix(&self, depth: usize, pool_left: T) -> T {
            let mut cap = pool_left - self.mand_load[depth];
            let mut acc = self.mand_value[depth];
            if cap <= T::zero() {
                return acc;
            }
            for &i in &self.tables.density2_order[self.scenario] {
                if i < depth || chosen_server(self.x1[i]).is_some() {
                    continue;
                }
                let v = self.tables.net_best[self.scenario][i][0];
                if v <= T::zero() {
                    break;
                }
                let r = self.tables.request_t[i];
                if cap >= r {
                    acc = acc + v;
                    cap = cap - r;
                    if cap <= T::zero() {
                        break;
                    }
                } else {
                    acc = acc + v * cap / r;
                    break;
                }
            }
            acc
        }
    }

    fn go<T: Scalar>(
        ctx: &mut Ctx<'_, T>,
        state: &mut SearchState<T>,
        depth: usize,
        value: T,
        consumed: T,
        loads: &mut [u64],
        row: &mut Vec<u32>,
    ) {
        state.tick();
        if state.aborted {
            return;
        }
        if depth == ctx.users {
            let improved = match &ctx.best {
                Some((_, best)) => value > *best,
                None => true,
            };
            if improved {
                ctx.best = Some((row.clone(), value));
            }
            return;
        }

        // remaining mandatory users must fit the pooled leftover capacity
        // (all quantities are small integers in T, so comparisons are exact)
        let pool_left = ctx.tables.pool - consumed;
        if pool_left < ctx.mand_load[depth] {
            return;
        }
        if let Some((_, best)) = &ctx.best {
            if certify(value + ctx.suffix_best[depth]) <= *best
                || certify(value + ctx.refined_suffix(depth, pool_left)) <= *best
            {
                return;
            }
        }

        let choices = &ctx.tables.net_order[ctx.scenario][depth][ctx.x1[depth] as usize];
        for &(choice, net) in choices {
            if let Some(j) = chosen_server(choice) {
                if loads[j] + ctx.tables.requests[depth] > ctx.tables.max_loads[j] {
                    continue;
                }
                let next = value + net;
                if let Some((_, best)) = &ctx.best {
                    // choices are sorted by net value, so once the certified
                    // bound falls to the incumbent no later sibling can win
                    if certify(next + ctx.suffix_best[depth + 1]) <= *best {
                        break;
                    }
                }
                loads[j] += ctx.tables.requests[depth];
                row.push(choice);
                go(
                    ctx,
                    state,
                    depth + 1,
                    next,
                    consumed + ctx.tables.request_t[depth],
                    loads,
                    row,
                );
                row.pop();
                loads[j] -= ctx.tables.requests[depth];
            } else {
                if let Some((_, best)) = &ctx.best {
                    if certify(value + ctx.suffix_best[depth + 1]) <= *best {
                        break;
                    }
                }
                row.push(choice);
                go(ctx, state, depth + 1, value, consumed, loads, row);
                row.pop();
            }
            if state.aborted {
                return;
            }
        }
    }

    let mut ctx = Ctx {
        tables,
        scenario,
        suffix_best: &suffix_best,
        mand_value: &mand_value,
        mand_load: &mand_load,
        x1,
        users,
        best: None,
    };
    let mut loads = vec![0u64; tables.servers];
    let mut row = Vec::with_capacity(users);
    go(&mut ctx, state, 0, T::zero(), T::zero(), &mut loads, &mut row);
    if state.aborted {
        return None;
    }
    ctx.best.map(|(row, value)| {
        debug_assert_eq!(
            value,
            scenario_value(
                instance,
                &Stage1Assignment { choice: x1.to_vec() },
                &row,
                scenario
            )
        );
        (row, value)
    })
}

/// Evaluate a complete stage-1 leaf: solve every scenario, aborting early
/// when the optimistic completion cannot beat the incumbent.
fn evaluate_leaf<T: Scalar>(
    instance: &Instance<T>,
    tables: &Tables<T>,
    state: &mut SearchState<T>,
    x1: &[u32],
    stage1_acc: T,
) {
    let scenarios = tables.scenarios;
    // pooled optimistic value of each scenario under this stage-1 vector
    let s2b: Vec<T> = (0..scenarios)
        .map(|s| tables.scenario_pooled(s, x1))
        .collect();

    let mut acc = stage1_acc;
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(scenarios);
    for s in 0..scenarios {
        let mut optimistic = acc;
        for k in s..scenarios {
            optimistic = optimistic + tables.prob[k] * s2b[k];
        }
        let optimistic = certify(optimistic);
        if optimistic <= state.threshold() {
            state.raise_ceiling(optimistic);
            return;
        }
        match solve_scenario_bb(instance, tables, state, s, x1) {
            Some((row, value)) => {
                acc = acc + tables.prob[s] * value;
                rows.push(row);
            }
            None => return, // aborted or (theoretically) infeasible
        }
    }
    if acc > state.inc_total {
        state.inc_total = acc;
        state.inc_x1 = x1.to_vec();
        state.inc_rows = rows;
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs<T: Scalar>(
    instance: &Instance<T>,
    tables: &Tables<T>,
    state: &mut SearchState<T>,
    depth: usize,
    q1_acc: T,
    d2_acc: T,
    loads: &mut [u64],
    x1: &mut Vec<u32>,
) {
    state.tick();
    if state.aborted {
        return;
    }
    if depth == tables.users {
        evaluate_leaf(instance, tables, state, x1, q1_acc);
        return;
    }

    // capacity-aware node bound: pooled stage-1 knapsack for the undecided
    // suffix plus pooled per-scenario recourse (strictly tighter than the
    // per-user bound the parent pruned with)
    if depth > 0 {
        let used = loads
            .iter()
            .fold(T::zero(), |acc, &l| acc + T::from_f64_lossy(l as f64));
        let refined = certify(q1_acc + tables.stage1_pooled(depth, used) + tables.stage2_pooled(x1));
        if refined <= state.threshold() {
            state.raise_ceiling(refined);
            return;
        }
    }

    let order = &tables.stage1_order[depth];
    for (k, &(choice, q1_gain)) in order.iter().enumerate() {
        let server = chosen_server(choice);
        if let Some(j) = server {
            if loads[j] + tables.requests[depth] > tables.max_loads[j] {
                continue; // energy-infeasible subtree, no candidates inside
            }
        }
        let next_q1 = if server.is_some() {
            q1_acc + q1_gain
        } else {
            q1_acc
        };
        let next_d2 = d2_acc + tables.delta2[depth][choice as usize];
        let bound = certify(next_q1 + next_d2 + tables.suffix[depth + 1]);
        if bound <= state.threshold() {
            state.raise_ceiling(bound);
            continue;
        }
        if let Some(j) = server {
            loads[j] += tables.requests[depth];
        }
        x1.push(choice);
        dfs(
            instance, tables, state, depth + 1, next_q1, next_d2, loads, x1,
        );
        x1.pop();
        if let Some(j) = server {
            loads[j] -= tables.requests[depth];
        }
        if state.aborted {
            // account for everything this frame did not finish
            state.raise_ceiling(bound);
            for &(later, later_q1) in &order[k + 1..] {
                let ls = chosen_server(later);
                if let Some(j) = ls {
                    if loads[j] + tables.requests[depth] > tables.max_loads[j] {
                        continue;
                    }
                }
                let lq1 = if ls.is_some() { q1_acc + later_q1 } else { q1_acc };
                let ld2 = d2_acc + tables.delta2[depth][later as usize];
                state.raise_ceiling(certify(lq1 + ld2 + tables.suffix[depth + 1]));
            }
            return;
        }
    }
}

fn finish<T: Scalar>(
    instance: &Instance<T>,
    state: SearchState<T>,
    exhausted: bool,
) -> Result<SolveResult<T>> {
    let x1 = Stage1Assignment {
        choice: state.inc_x1,
    };
    let x2 = Stage2Assignment {
        choice: state.inc_rows,
    };
    let objective = evaluate(instance, &x1, &x2)?.total;
    // no abandoned region can hide a better solution, so an exhausted search
    // with an empty ceiling is proven optimal
    let best_bound = match state.ceiling {
        Some(ceiling) => ceiling.max(objective),
        None => objective,
    };
    let gap = ((best_bound - objective) / best_bound.abs().max(T::one())).max(T::zero());
    debug_assert!(check_feasible(instance, &x1, &x2)?.is_feasible());
    Ok(SolveResult {
        x1,
        x2,
        objective,
        best_bound,
        gap,
        status: if exhausted {
            SolveStatus::Optimal
        } else {
            SolveStatus::Feasible
        },
        nodes_explored: state.nodes,
        wall_time: state.start.elapsed().as_secs_f64(),
    })
}

/// Depth-first branch-and-bound over stage-1 choices with exact per-scenario
/// subproblem solves at the leaves. With default options the result is the
/// proven optimum and matches [`brute_force`] bit for bit.
pub fn solve_exact<T: Scalar>(
    instance: &Instance<T>,
    options: &SolveOptions,
) -> Result<SolveResult<T>> {
    instance.validate()?;
    options.validate()?;
    let tables = Tables::build(instance);
    let mut state = SearchState::new(tables.users, tables.scenarios, options);
    let mut loads = vec![0u64; tables.servers];
    let mut x1 = Vec::with_capacity(tables.users);
    dfs(
        instance,
        &tables,
        &mut state,
        0,
        T::zero(),
        T::zero(),
        &mut loads,
        &mut x1,
    );
    let exhausted = !state.aborted;
    if state.aborted && state.ceiling.is_none() {
        // aborted before any frame could account for its children
        state.raise_ceiling(certify(tables.suffix[0]));
    }
    finish(instance, state, exhausted)
}

/// Solve one scenario's recourse subproblem for a complete stage-1 assignment.
/// Returns `Ok(None)` only if the subproblem is infeasible, which cannot occur
/// when `x1` itself satisfies the stage-1 energy budgets.
pub fn solve_scenario_subproblem<T: Scalar>(
    instance: &Instance<T>,
    x1: &Stage1Assignment,
    scenario: usize,
) -> Result<Option<(Vec<u32>, T)>> {
    instance.validate()?;
    if x1.choice.len() != instance.num_users() {
        return Err(Error::dimension(format!(
            "stage-1 assignment covers {} users, instance has {}",
            x1.choice.len(),
            instance.num_users()
        )));
    }
    if scenario >= instance.num_scenarios() {
        return Err(Error::dimension(format!(
            "scenario {scenario} out of range ({} scenarios)",
            instance.num_scenarios()
        )));
    }
    let tables = Tables::build(instance);
    let mut state = SearchState::new(tables.users, tables.scenarios, &SolveOptions::default());
    Ok(solve_scenario_bb(
        instance,
        &tables,
        &mut state,
        scenario,
        &x1.choice,
    ))
}

/// Admissible upper bound on the best completion of a stage-1 prefix
/// (users `0..depth` decided). Ignores energy capacities for undecided users
/// and stage 2, so it is never below the true best completion value.
pub fn upper_bound<T: Scalar>(instance: &Instance<T>, partial_x1: &[u32], depth: usize) -> T {
    assert!(depth <= partial_x1.len());
    let tables = Tables::build(instance);
    let mut q1_acc = T::zero();
    let mut d2_acc = T::zero();
    for (i, &c) in partial_x1.iter().take(depth).enumerate() {
        if chosen_server(c).is_some() {
            q1_acc = q1_acc + tables.q1_of(i, c);
        }
        d2_acc = d2_acc + tables.delta2[i][c as usize];
    }
    certify(q1_acc + d2_acc + tables.suffix[depth])
}

fn enumeration_cost(users: usize, servers: usize, scenarios: usize) -> Option<u128> {
    let base = (servers as u128).checked_add(1)?;
    let per_stage = base.checked_pow(users as u32)?;
    per_stage
        .checked_mul(scenarios as u128)?
        .checked_mul(per_stage)
}

/// Exhaustive oracle: enumerate every stage-1 vector and, per scenario, every
/// stage-2 vector, in the same canonical order as [`solve_exact`]. Only for
/// tiny instances.
pub fn brute_force<T: Scalar>(instance: &Instance<T>) -> Result<SolveResult<T>> {
    brute_force_with_budget(instance, DEFAULT_ENUMERATION_BUDGET)
}

/// [`brute_force`] with an explicit work budget.
pub fn brute_force_with_budget<T: Scalar>(
    instance: &Instance<T>,
    budget: u128,
) -> Result<SolveResult<T>> {
    instance.validate()?;
    let users = instance.num_users();
    let servers = instance.num_servers();
    let scenarios = instance.num_scenarios();
    match enumeration_cost(users, servers, scenarios) {
        Some(cost) if cost <= budget => {}
        _ => {
            return Err(Error::EnumerationBudget(format!(
                "(S+1)^U * |SC| * (S+1)^U exceeds {budget} for U={users}, S={servers}, |SC|={scenarios}"
            )))
        }
    }

    let tables = Tables::build(instance);
    let start = Instant::now();

    let mut inc_total = T::zero();
    let mut inc_x1 = vec![0u32; users];
    let mut inc_rows = vec![vec![0u32; users]; scenarios];
    let mut candidates: u64 = 0;

    // odometer over per-user rank vectors; the last user cycles fastest,
    // mirroring the solver's depth-first visit order
    let mut rank = vec![0usize; users];
    'outer: loop {
        let x1: Vec<u32> = (0..users)
            .map(|i| tables.stage1_order[i][rank[i]].0)
            .collect();

        let mut loads = vec![0u64; servers];
        let mut feasible = true;
        for (i, &c) in x1.iter().enumerate() {
            if let Some(j) = chosen_server(c) {
                loads[j] += tables.requests[i];
                if loads[j] > tables.max_loads[j] {
                    feasible = false;
                    break;
                }
            }
        }

        if feasible {
            candidates += 1;
            let assignment = Stage1Assignment { choice: x1.clone() };
            let mut rows: Vec<Vec<u32>> = Vec::with_capacity(scenarios);
            let mut all_scenarios_ok = true;
            for s in 0..scenarios {
                match enumerate_scenario(instance, &tables, &assignment, s) {
                    Some((row, _)) => rows.push(row),
                    None => {
                        all_scenarios_ok = false;
                        break;
                    }
                }
            }
            if all_scenarios_ok {
                let total = candidate_total(instance, &tables, &assignment, &rows);
                if total > inc_total {
                    inc_total = total;
                    inc_x1 = x1;
                    inc_rows = rows;
                }
            }
        }

        // advance odometer
        let mut d = users;
        loop {
            if d == 0 {
                break 'outer;
            }
            d -= 1;
            rank[d] += 1;
            if rank[d] < tables.stage1_order[d].len() {
                break;
            }
            rank[d] = 0;
        }
    }

    let x1 = Stage1Assignment { choice: inc_x1 };
    let x2 = Stage2Assignment { choice: inc_rows };
    let objective = evaluate(instance, &x1, &x2)?.total;
    Ok(SolveResult {
        x1,
        x2,
        objective,
        best_bound: objective,
        gap: T::zero(),
        status: SolveStatus::Optimal,
        nodes_explored: candidates,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Literal per-scenario enumeration in canonical choice order, keeping the
/// first strict maximizer. Returns `None` when no feasible row exists.
fn enumerate_scenario<T: Scalar>(
    instance: &Instance<T>,
    tables: &Tables<T>,
    x1: &Stage1Assignment,
    scenario: usize,
) -> Option<(Vec<u32>, T)> {
    let users = tables.users;
    let mut best: Option<(Vec<u32>, T)> = None;
    let mut rank = vec![0usize; users];
    'outer: loop {
        let row: Vec<u32> = (0..users)
            .map(|i| tables.net_order[scenario][i][x1.choice[i] as usize][rank[i]].0)
            .collect();

        let mut loads = vec![0u64; tables.servers];
        let mut feasible = true;
        for (i, &c) in row.iter().enumerate() {
            if let Some(j) = chosen_server(c) {
                loads[j] += tables.requests[i];
                if loads[j] > tables.max_loads[j] {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible {
            let value = scenario_value(instance, x1, &row, scenario);
            let improved = match &best {
                Some((_, b)) => value > *b,
                None => true,
            };
            if improved {
                best = Some((row, value));
            }
        }

        let mut d = users;
        loop {
            if d == 0 {
                break 'outer;
            }
            d -= 1;
            rank[d] += 1;
            if rank[d] < tables.net_order[scenario][d][x1.choice[d] as usize].len() {
                break;
            }
            rank[d] = 0;
        }
    }
    best
}
