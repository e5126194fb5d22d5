//! Benchmark several algorithms over random queries and print the
//! report table.

use exactsim::eval::Algorithm;
use exactsim::synth::erdos_renyi_digraph;
use exactsim::{run_experiment, QueryOptions};

fn main() -> exactsim::Result<()> {
    let g = erdos_renyi_digraph(120, 5.0, 17);
    let algorithms = [
        Algorithm::ExactSim(QueryOptions {
            seed: 4,
            sample_override: Some(100_000),
            ..QueryOptions::new(1e-3)
        }),
        Algorithm::MonteCarlo {
            walk_cap: 30,
            walks_per_node: 1000,
            seed: 4,
        },
        Algorithm::ParSim { iterations: 30 },
    ];

    let report = run_experiment(&g, 0.6, &algorithms, 10, 10, 99)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
    Ok(())
}
