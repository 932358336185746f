use std::time::Instant;

use edge_placer_core::solver::{solve_exact, SolveOptions};
use edge_placer_core::world::{sample_instance, SampleSpec, SpatialMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let u: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(10);
    let s: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(3);
    let sc: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(10);
    let n: u64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(5);
    let gap: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(0.0);

    let spec = SampleSpec::<f64>::new(SpatialMode::Normal, u, s, sc);
    let options = SolveOptions {
        gap_tolerance: gap,
        ..SolveOptions::default()
    };
    let mut total = 0.0;
    for seed in 0..n {
        let instance = sample_instance(&spec, seed).unwrap();
        let t = Instant::now();
        let result = solve_exact(&instance, &options).unwrap();
        let dt = t.elapsed().as_secs_f64();
        total += dt;
        println!(
            "seed {seed}: obj {:.2} gap {:.4} nodes {} status {:?} in {:.3}s",
            result.objective, result.gap, result.nodes_explored, result.status, dt
        );
    }
    println!("mean {:.3}s over {n} solves", total / n as f64);
}
