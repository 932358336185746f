use std::time::Instant;

use edge_placer_core::solver::{solve_exact, SolveOptions};
use edge_placer_core::world::{sample_instance, SampleSpec, SpatialMode};

fn main() {
    let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 20, 5, 25);
    eprintln!("[{:?}] sampling", Instant::now());
    let instance = sample_instance(&spec, 0).unwrap();
    eprintln!("[{:?}] sampled, solving", Instant::now());
    let options = SolveOptions {
        gap_tolerance: 0.01,
        node_limit: Some(1000),
        ..SolveOptions::default()
    };
    let result = solve_exact(&instance, &options).unwrap();
    eprintln!(
        "[{:?}] solved: {} nodes, status {:?}",
        Instant::now(),
        result.nodes_explored,
        result.status
    );
}
