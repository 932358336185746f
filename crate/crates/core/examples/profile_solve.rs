use std::time::Instant;

use edge_placer_core::solver::{solve_exact, SolveOptions};
use edge_placer_core::world::{sample_instance, SampleSpec, SpatialMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lo: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0);
    let hi: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(24);
    let node_limit: Option<u64> = args.get(3).map(|s| s.parse().unwrap());
    let gap: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let spec = SampleSpec::<f64>::new(SpatialMode::Normal, 20, 5, 25);
    let options = SolveOptions {
        gap_tolerance: gap,
        node_limit,
        ..SolveOptions::default()
    };
    for seed in lo..hi {
        let instance = sample_instance(&spec, seed).unwrap();
        let t = Instant::now();
        let result = solve_exact(&instance, &options).unwrap();
        eprintln!(
            "seed {seed}: {:.3}s nodes {} gap {:.4} {:?}",
            t.elapsed().as_secs_f64(),
            result.nodes_explored,
            result.gap,
            result.status
        );
    }
}
