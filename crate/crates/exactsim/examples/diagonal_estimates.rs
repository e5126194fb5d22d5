//! Compare the basic and optimized diagonal estimators against the exact
//! pair-chain oracle on a small graph.

use exactsim::diag::{estimate_basic, estimate_optimized};
use exactsim::synth::erdos_renyi_digraph;
use exactsim::walk::StreamPurpose;
use exactsim::{pair_chain_diag_oracle, RandomSource};

fn main() -> exactsim::Result<()> {
    let c = 0.6;
    let g = erdos_renyi_digraph(40, 4.0, 5);
    let src = RandomSource::new(1);
    let r_k = 50_000;

    println!("node  d_in  oracle    basic     optimized  l(k)");
    for k in (0..g.node_count() as u32).step_by(5) {
        let oracle = pair_chain_diag_oracle(&g, k, c, 1e-12)?;
        let mut rng = src.stream(StreamPurpose::DiagTrial, k, 0);
        let basic = estimate_basic(&g, k, c, r_k, &mut rng);
        let mut rng = src.stream(StreamPurpose::DiagTrial, k, 1);
        let (opt, lk) = estimate_optimized(&g, k, c, r_k, &mut rng);
        println!(
            "{k:>4}  {:>4}  {oracle:.6}  {basic:.6}  {opt:.6}   {lk}",
            g.in_degree(k)
        );
    }
    println!("(every D(k,k) lies in [1-c, 1] = [0.4, 1.0])");
    Ok(())
}
