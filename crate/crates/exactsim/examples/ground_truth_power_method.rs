//! Exact all-pairs SimRank on a small graph via the power method, with
//! the residual trace showing geometric convergence.

use exactsim::synth::erdos_renyi_digraph;
use exactsim::power_method_trace;

fn main() -> exactsim::Result<()> {
    let c = 0.6;
    let g = erdos_renyi_digraph(150, 5.0, 11);
    let (s, residuals) = power_method_trace(&g, c, 40, 10_000)?;

    println!("n = {}, {} iterations", s.n(), residuals.len());
    for (t, r) in residuals.iter().enumerate().step_by(5) {
        println!("  iter {t:>2}: residual {r:.3e} (bound c^t = {:.3e})", c.powi(t as i32));
    }

    // a single row of the matrix is the ground truth for source 0
    let row = s.row(0);
    let mut best: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
    best.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    println!("closest nodes to 0:");
    for (node, score) in best.iter().take(6) {
        println!("  {node:>4}  {score:.6}");
    }
    Ok(())
}
