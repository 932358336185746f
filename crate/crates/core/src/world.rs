//! Problem datum for the edge placement model: grid, users, servers, movement
//! scenarios, model constants, and the elementary formulas (distance, QoS,
//! energy) every other module consumes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Current on-disk schema version for [`Instance`] documents.
pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

/// Rectangular cell grid. Coordinates are cell indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub width: u32,
    pub height: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            width: 20,
            height: 20,
        }
    }
}

impl GridConfig {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config("grid dimensions must be at least 1x1"));
        }
        Ok(GridConfig { width, height })
    }

    pub fn contains(&self, pos: Position) -> bool {
        pos.x < self.width && pos.y < self.height
    }

    pub fn center(&self) -> Position {
        Position {
            x: self.width / 2,
            y: self.height / 2,
        }
    }
}

/// Cell coordinates inside a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub fn new(x: u32, y: u32) -> Self {
        Position { x, y }
    }
}

/// A mobile user with a fixed-size container request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: usize,
    pub pos: Position,
    /// Number of requested containers (R_i). Generated in [1, 10]; any
    /// positive integer is accepted on load.
    pub request: u32,
}

/// An edge server with an energy budget and a container capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Server<T> {
    pub id: usize,
    pub pos: Position,
    pub energy_budget: T,
    pub capacity: T,
}

/// One-step displacement of a single user: each component in {-1, 0, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub dx: i8,
    pub dy: i8,
}

impl Move {
    pub const STAY: Move = Move { dx: 0, dy: 0 };

    pub fn is_valid(&self) -> bool {
        (-1..=1).contains(&self.dx) && (-1..=1).contains(&self.dy)
    }
}

/// The nine movement modes in a fixed order used by the sampler.
pub const MOVE_MODES: [Move; 9] = [
    Move { dx: -1, dy: -1 },
    Move { dx: -1, dy: 0 },
    Move { dx: -1, dy: 1 },
    Move { dx: 0, dy: -1 },
    Move { dx: 0, dy: 0 },
    Move { dx: 0, dy: 1 },
    Move { dx: 1, dy: -1 },
    Move { dx: 1, dy: 0 },
    Move { dx: 1, dy: 1 },
];

/// One realization of every user's one-step movement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementScenario {
    pub moves: Vec<Move>,
}

/// Migration cost table: either one scalar for every off-diagonal pair or a
/// full matrix in row-major order (from-server major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho<T> {
    /// Cost `rho0` for every pair j' != j; the diagonal is zero.
    Scalar(T),
    /// Flat row-major matrix of size `servers * servers`.
    Matrix { servers: usize, values: Vec<T> },
}

impl<T: Scalar> Rho<T> {
    /// Migration cost from server `from` to server `to` (both 0-based).
    pub fn cost(&self, from: usize, to: usize) -> T {
        if from == to {
            return T::zero();
        }
        match self {
            Rho::Scalar(r) => *r,
            Rho::Matrix { servers, values } => values[from * servers + to],
        }
    }

    fn validate(&self, servers: usize) -> Result<()> {
        match self {
            Rho::Scalar(r) => {
                if *r < T::zero() || !r.is_finite() {
                    return Err(Error::config("rho must be finite and nonnegative"));
                }
            }
            Rho::Matrix {
                servers: s,
                values,
            } => {
                if *s != servers {
                    return Err(Error::dimension(format!(
                        "rho matrix is for {s} servers, instance has {servers}"
                    )));
                }
                if values.len() != s * s {
                    return Err(Error::config("rho matrix must hold servers^2 values"));
                }
                for (idx, v) in values.iter().enumerate() {
                    if *v < T::zero() || !v.is_finite() {
                        return Err(Error::config("rho entries must be finite and nonnegative"));
                    }
                    if idx / s == idx % s && !v.is_zero() {
                        return Err(Error::config("rho diagonal must be zero"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Model constants shared by every formula: QoS coefficient, energy
/// coefficient, migration costs and scenario probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants<T> {
    pub sigma: T,
    pub gamma: T,
    pub rho: Rho<T>,
    /// Per-scenario probabilities; `None` means uniform 1/|SC|.
    pub scenario_prob: Option<Vec<T>>,
}

impl<T: Scalar> Default for ModelConstants<T> {
    fn default() -> Self {
        ModelConstants {
            sigma: T::from_count(396),
            gamma: T::from_count(100),
            rho: Rho::Scalar(T::from_count(10)),
            scenario_prob: None,
        }
    }
}

impl<T: Scalar> ModelConstants<T> {
    fn validate(&self, servers: usize, scenarios: usize) -> Result<()> {
        if self.sigma <= T::zero() || !self.sigma.is_finite() {
            return Err(Error::config("sigma must be positive and finite"));
        }
        if self.gamma <= T::zero() || !self.gamma.is_finite() {
            return Err(Error::config("gamma must be positive and finite"));
        }
        self.rho.validate(servers)?;
        if let Some(probs) = &self.scenario_prob {
            if probs.len() != scenarios {
                return Err(Error::dimension(format!(
                    "{} scenario probabilities for {} scenarios",
                    probs.len(),
                    scenarios
                )));
            }
            let mut sum = 0.0f64;
            for p in probs {
                if *p < T::zero() || !p.is_finite() {
                    return Err(Error::config("scenario probabilities must be nonnegative"));
                }
                sum += p.as_f64();
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "scenario probabilities sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Spatial distribution of the sampled user population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialMode {
    /// Users uniform over the whole grid.
    Normal,
    /// Users uniform inside a configured square cluster.
    Special,
    /// Dataset-level mode: half normal, half special records. Not valid for
    /// sampling a single instance.
    Mixed,
}

impl std::fmt::Display for SpatialMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpatialMode::Normal => write!(f, "normal"),
            SpatialMode::Special => write!(f, "special"),
            SpatialMode::Mixed => write!(f, "mixed"),
        }
    }
}

/// The full problem datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance<T> {
    pub version: u32,
    pub grid: GridConfig,
    pub users: Vec<User>,
    pub servers: Vec<Server<T>>,
    pub scenarios: Vec<MovementScenario>,
    pub constants: ModelConstants<T>,
    /// RNG seed the instance was sampled from (0 for hand-built instances).
    pub seed: u64,
}

impl<T: Scalar> Instance<T> {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_servers(&self) -> usize {
        self.servers.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    /// Probability of scenario `s` (uniform when not explicitly set).
    pub fn scenario_prob(&self, s: usize) -> T {
        match &self.constants.scenario_prob {
            Some(p) => p[s],
            None => T::one() / T::from_usize(self.scenarios.len()).unwrap(),
        }
    }

    /// Effective first-stage distance between user `i` and server `j`.
    pub fn stage1_distance(&self, i: usize, j: usize) -> u32 {
        effective_distance(self.users[i].pos, self.servers[j].pos)
    }

    /// Position of user `i` after applying scenario `s`'s displacement.
    pub fn stage2_position(&self, i: usize, s: usize) -> Position {
        apply_move(self.users[i].pos, self.scenarios[s].moves[i], self.grid)
    }

    /// Effective second-stage distance between user `i` and server `j` under
    /// scenario `s`.
    pub fn stage2_distance(&self, i: usize, j: usize, s: usize) -> u32 {
        effective_distance(self.stage2_position(i, s), self.servers[j].pos)
    }

    /// First-stage QoS of serving user `i` from server `j`.
    pub fn stage1_qos(&self, i: usize, j: usize) -> T {
        qos(
            self.users[i].request,
            self.stage1_distance(i, j),
            self.constants.gamma,
        )
    }

    /// Second-stage QoS of serving user `i` from server `j` under scenario `s`.
    pub fn stage2_qos(&self, i: usize, j: usize, s: usize) -> T {
        qos(
            self.users[i].request,
            self.stage2_distance(i, j, s),
            self.constants.gamma,
        )
    }

    /// Largest total request load server `j` can carry without exceeding its
    /// energy budget: max { L : sigma * L / Q_j <= E_j }, computed exactly in
    /// rational arithmetic so boundary loads are never misclassified.
    pub fn max_load(&self, j: usize) -> u64 {
        let server = &self.servers[j];
        let e = exact_rational(server.energy_budget.as_f64());
        let q = exact_rational(server.capacity.as_f64());
        let sigma = exact_rational(self.constants.sigma.as_f64());
        let limit = e * q / sigma;
        let floored = limit.floor().to_integer();
        if floored < BigInt::from(0) {
            0
        } else {
            floored.to_u64().unwrap_or(u64::MAX)
        }
    }

    /// Max-load table for all servers.
    pub fn max_loads(&self) -> Vec<u64> {
        (0..self.num_servers()).map(|j| self.max_load(j)).collect()
    }

    /// Check every structural invariant of the datum.
    pub fn validate(&self) -> Result<()> {
        if self.version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported instance schema version {}",
                self.version
            )));
        }
        if self.users.is_empty() || self.servers.is_empty() || self.scenarios.is_empty() {
            return Err(Error::config(
                "instance needs at least one user, server and scenario",
            ));
        }
        for (i, user) in self.users.iter().enumerate() {
            if user.id != i {
                return Err(Error::config(format!("user {i} has id {}", user.id)));
            }
            if !self.grid.contains(user.pos) {
                return Err(Error::config(format!("user {i} outside the grid")));
            }
            if user.request == 0 {
                return Err(Error::config(format!("user {i} has zero request")));
            }
        }
        for (j, server) in self.servers.iter().enumerate() {
            if server.id != j {
                return Err(Error::config(format!("server {j} has id {}", server.id)));
            }
            if !self.grid.contains(server.pos) {
                return Err(Error::config(format!("server {j} outside the grid")));
            }
            if server.energy_budget <= T::zero() || server.capacity <= T::zero() {
                return Err(Error::config(format!(
                    "server {j} must have positive energy budget and capacity"
                )));
            }
        }
        for (s, scenario) in self.scenarios.iter().enumerate() {
            if scenario.moves.len() != self.users.len() {
                return Err(Error::dimension(format!(
                    "scenario {s} covers {} users, instance has {}",
                    scenario.moves.len(),
                    self.users.len()
                )));
            }
            if let Some(mv) = scenario.moves.iter().find(|m| !m.is_valid()) {
                return Err(Error::config(format!(
                    "scenario {s} holds invalid move ({}, {})",
                    mv.dx, mv.dy
                )));
            }
        }
        self.constants
            .validate(self.servers.len(), self.scenarios.len())
    }

    /// Compact single-line JSON encoding.
    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        Ok(serde_json::to_string(self)?)
    }

    /// Parse and validate an instance document.
    pub fn from_json(text: &str) -> Result<Self>
    where
        T: serde::de::DeserializeOwned,
    {
        let instance: Instance<T> = serde_json::from_str(text)?;
        instance.validate()?;
        Ok(instance)
    }
}

fn exact_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

/// Manhattan distance between two cells.
pub fn manhattan(p: Position, q: Position) -> u32 {
    p.x.abs_diff(q.x) + p.y.abs_diff(q.y)
}

/// Manhattan distance floored at 1 so the QoS ratio stays finite when a user
/// and a server share a cell.
pub fn effective_distance(p: Position, q: Position) -> u32 {
    manhattan(p, q).max(1)
}

/// Quality of service: gamma * R / d.
pub fn qos<T: Scalar>(request: u32, distance: u32, gamma: T) -> T {
    debug_assert!(distance >= 1);
    gamma * T::from_count(request) / T::from_count(distance)
}

/// Energy consumed by a request of size R on a server of capacity Q:
/// sigma * R / Q.
pub fn energy_cost<T: Scalar>(request: u32, capacity: T, sigma: T) -> T {
    debug_assert!(capacity > T::zero());
    sigma * T::from_count(request) / capacity
}

/// Apply a one-step displacement, clamping to the grid (no wraparound).
pub fn apply_move(pos: Position, mv: Move, grid: GridConfig) -> Position {
    let clamp = |v: i64, max: u32| v.clamp(0, i64::from(max) - 1) as u32;
    Position {
        x: clamp(i64::from(pos.x) + i64::from(mv.dx), grid.width),
        y: clamp(i64::from(pos.y) + i64::from(mv.dy), grid.height),
    }
}

/// Square region users are confined to in [`SpatialMode::Special`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSpec {
    /// Center cell; `None` means the grid center.
    pub center: Option<Position>,
    /// Side length in cells.
    pub side: u32,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            center: None,
            side: 6,
        }
    }
}

impl ClusterSpec {
    /// Inclusive coordinate ranges of the cluster inside `grid`.
    pub fn bounds(&self, grid: GridConfig) -> Result<(Position, Position)> {
        if self.side == 0 {
            return Err(Error::config("cluster side must be at least 1"));
        }
        let center = self.center.unwrap_or_else(|| grid.center());
        let half = self.side / 2;
        let low_x = center.x.checked_sub(half);
        let low_y = center.y.checked_sub(half);
        let (low_x, low_y) = match (low_x, low_y) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::config("cluster region extends outside the grid")),
        };
        let high_x = low_x + self.side - 1;
        let high_y = low_y + self.side - 1;
        if high_x >= grid.width || high_y >= grid.height {
            return Err(Error::config("cluster region extends outside the grid"));
        }
        Ok((Position::new(low_x, low_y), Position::new(high_x, high_y)))
    }
}

/// Arguments for [`sample_instance`].
#[derive(Debug, Clone)]
pub struct SampleSpec<T> {
    pub mode: SpatialMode,
    pub users: usize,
    pub servers: usize,
    pub scenarios: usize,
    pub grid: GridConfig,
    pub constants: ModelConstants<T>,
    pub cluster: ClusterSpec,
    /// Homogeneous energy budget for generated servers.
    pub energy_budget: T,
    /// Homogeneous container capacity for generated servers.
    pub capacity: T,
    /// Inclusive request-size range for generated users.
    pub request_range: (u32, u32),
    /// Fixed server positions; when set, no server randomness is consumed.
    pub server_layout: Option<Vec<Position>>,
}

impl<T: Scalar> SampleSpec<T> {
    pub fn new(mode: SpatialMode, users: usize, servers: usize, scenarios: usize) -> Self {
        SampleSpec {
            mode,
            users,
            servers,
            scenarios,
            grid: GridConfig::default(),
            constants: ModelConstants::default(),
            cluster: ClusterSpec::default(),
            energy_budget: T::from_count(396),
            capacity: T::from_count(24),
            request_range: (1, 10),
            server_layout: None,
        }
    }
}

/// Sample a seeded instance. Identical arguments and seed yield a
/// bit-identical instance. Draw order: servers (skipped when a layout is
/// given), then users (position, request), then scenario moves.
pub fn sample_instance<T: Scalar>(spec: &SampleSpec<T>, seed: u64) -> Result<Instance<T>> {
    if spec.users == 0 || spec.servers == 0 || spec.scenarios == 0 {
        return Err(Error::config(
            "sample needs at least one user, server and scenario",
        ));
    }
    if spec.request_range.0 == 0 || spec.request_range.0 > spec.request_range.1 {
        return Err(Error::config("request range must satisfy 1 <= lo <= hi"));
    }
    if spec.mode == SpatialMode::Mixed {
        return Err(Error::config(
            "mixed is a dataset-level mode; sample normal or special instances",
        ));
    }
    let user_bounds = match spec.mode {
        SpatialMode::Normal => (
            Position::new(0, 0),
            Position::new(spec.grid.width - 1, spec.grid.height - 1),
        ),
        SpatialMode::Special => spec.cluster.bounds(spec.grid)?,
        SpatialMode::Mixed => unreachable!(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let servers: Vec<Server<T>> = match &spec.server_layout {
        Some(layout) => {
            if layout.len() != spec.servers {
                return Err(Error::dimension(format!(
                    "server layout holds {} positions, expected {}",
                    layout.len(),
                    spec.servers
                )));
            }
            if let Some(p) = layout.iter().find(|p| !spec.grid.contains(**p)) {
                return Err(Error::config(format!(
                    "server layout position ({}, {}) outside the grid",
                    p.x, p.y
                )));
            }
            layout
                .iter()
                .enumerate()
                .map(|(id, pos)| Server {
                    id,
                    pos: *pos,
                    energy_budget: spec.energy_budget,
                    capacity: spec.capacity,
                })
                .collect()
        }
        None => (0..spec.servers)
            .map(|id| Server {
                id,
                pos: Position {
                    x: rng.gen_range(0..spec.grid.width),
                    y: rng.gen_range(0..spec.grid.height),
                },
                energy_budget: spec.energy_budget,
                capacity: spec.capacity,
            })
            .collect(),
    };

    let users: Vec<User> = (0..spec.users)
        .map(|id| User {
            id,
            pos: Position {
                x: rng.gen_range(user_bounds.0.x..=user_bounds.1.x),
                y: rng.gen_range(user_bounds.0.y..=user_bounds.1.y),
            },
            request: rng.gen_range(spec.request_range.0..=spec.request_range.1),
        })
        .collect();

    let scenarios: Vec<MovementScenario> = (0..spec.scenarios)
        .map(|_| MovementScenario {
            moves: (0..spec.users)
                .map(|_| MOVE_MODES[rng.gen_range(0..MOVE_MODES.len())])
                .collect(),
        })
        .collect();

    let instance = Instance {
        version: INSTANCE_SCHEMA_VERSION,
        grid: spec.grid,
        users,
        servers,
        scenarios,
        constants: spec.constants.clone(),
        seed,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: u32, y: u32) -> Position {
        Position::new(x, y)
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan(p(1, 2), p(4, 6)), 7);
        assert_eq!(manhattan(p(3, 3), p(3, 3)), 0);
        assert_eq!(manhattan(p(0, 0), p(19, 19)), 38);
    }

    #[test]
    fn effective_distance_floors_at_one() {
        assert_eq!(effective_distance(p(3, 3), p(3, 3)), 1);
        assert_eq!(effective_distance(p(1, 2), p(4, 6)), 7);
        assert_eq!(effective_distance(p(5, 5), p(5, 6)), 1);
    }

    #[test]
    fn qos_examples() {
        assert_eq!(qos(6, 3, 100.0f64), 200.0);
        assert_eq!(qos(1, 1, 100.0f64), 100.0);
        assert_eq!(qos(10, 5, 100.0f64), 200.0);
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_cost(4, 24.0f64, 396.0), 66.0);
        assert_eq!(energy_cost(24, 24.0f64, 396.0), 396.0);
        assert_eq!(energy_cost(0, 24.0f64, 396.0), 0.0);
    }

    #[test]
    fn energy_linear_in_request_for_default_constants() {
        for r in 0..=40u32 {
            assert_eq!(energy_cost(r, 24.0f64, 396.0), 16.5 * f64::from(r));
        }
        // one full budget is exactly 24 containers
        assert_eq!(energy_cost(24, 24.0f64, 396.0), 396.0);
    }

    #[test]
    fn apply_move_examples() {
        let grid = GridConfig::default();
        assert_eq!(
            apply_move(p(0, 0), Move { dx: -1, dy: -1 }, grid),
            p(0, 0)
        );
        assert_eq!(apply_move(p(5, 5), Move::STAY, grid), p(5, 5));
        assert_eq!(apply_move(p(19, 10), Move { dx: 1, dy: 1 }, grid), p(19, 11));
    }

    #[test]
    fn max_load_matches_energy_boundary() {
        let instance = sample_instance(
            &SampleSpec::<f64>::new(SpatialMode::Normal, 2, 2, 1),
            42,
        )
        .unwrap();
        // sigma 396, E 396, Q 24: exactly 24 containers fit.
        assert_eq!(instance.max_load(0), 24);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 20, 5, 25);
        let a = sample_instance(&spec, 7).unwrap();
        let b = sample_instance(&spec, 7).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = sample_instance(&spec, 8).unwrap();
        assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn sampled_requests_in_range() {
        let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 20, 5, 25);
        let instance = sample_instance(&spec, 3).unwrap();
        assert!(instance
            .users
            .iter()
            .all(|u| (1..=10).contains(&u.request)));
    }

    #[test]
    fn special_mode_confines_users_to_cluster() {
        let mut spec = SampleSpec::<f64>::new(SpatialMode::Special, 20, 5, 25);
        spec.cluster = ClusterSpec {
            center: Some(p(10, 10)),
            side: 6,
        };
        let instance = sample_instance(&spec, 11).unwrap();
        for user in &instance.users {
            assert!((7..=12).contains(&user.pos.x), "x={}", user.pos.x);
            assert!((7..=12).contains(&user.pos.y), "y={}", user.pos.y);
        }
    }

    #[test]
    fn cluster_outside_grid_is_config_error() {
        let mut spec = SampleSpec::<f64>::new(SpatialMode::Special, 5, 2, 2);
        spec.cluster = ClusterSpec {
            center: Some(p(19, 19)),
            side: 6,
        };
        assert!(matches!(
            sample_instance(&spec, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mixed_mode_is_rejected_for_single_instances() {
        let spec = SampleSpec::<f64>::new(SpatialMode::Mixed, 5, 2, 2);
        assert!(matches!(sample_instance(&spec, 1), Err(Error::Config(_))));
    }

    #[test]
    fn instance_round_trips_through_json() {
        let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 4, 2, 3);
        let instance = sample_instance(&spec, 5).unwrap();
        let text = instance.to_json().unwrap();
        let parsed = Instance::<f64>::from_json(&text).unwrap();
        assert_eq!(instance, parsed);
    }

    #[test]
    fn f32_instances_sample_too() {
        let spec = SampleSpec::<f32>::new(SpatialMode::Normal, 3, 2, 2);
        let instance = sample_instance(&spec, 9).unwrap();
        assert_eq!(instance.max_load(0), 24);
        assert_eq!(instance.stage1_qos(0, 0), {
            let d = instance.stage1_distance(0, 0);
            100.0f32 * instance.users[0].request as f32 / d as f32
        });
    }

    proptest! {
        #[test]
        fn manhattan_symmetric_and_triangle(
            ax in 0u32..20, ay in 0u32..20,
            bx in 0u32..20, by in 0u32..20,
            cx in 0u32..20, cy in 0u32..20,
        ) {
            let (a, b, c) = (p(ax, ay), p(bx, by), p(cx, cy));
            prop_assert_eq!(manhattan(a, b), manhattan(b, a));
            prop_assert!(manhattan(a, c) <= manhattan(a, b) + manhattan(b, c));
            prop_assert!(effective_distance(a, b) >= 1);
        }

        #[test]
        fn moves_never_leave_grid(
            x in 0u32..20, y in 0u32..20,
            dx in -1i8..=1, dy in -1i8..=1,
        ) {
            let grid = GridConfig::default();
            let moved = apply_move(p(x, y), Move { dx, dy }, grid);
            prop_assert!(grid.contains(moved));
            prop_assert_eq!(apply_move(p(x, y), Move::STAY, grid), p(x, y));
        }

        #[test]
        fn qos_monotone(r in 1u32..200, d in 1u32..100) {
            let base = qos(r, d, 100.0f64);
            prop_assert!(qos(r + 1, d, 100.0f64) > base);
            prop_assert!(qos(r, d + 1, 100.0f64) < base);
        }
    }
}
