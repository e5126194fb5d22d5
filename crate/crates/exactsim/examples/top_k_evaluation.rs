//! Rank the neighbors of a source, score the ranking against ground
//! truth, and run a pooled relative-precision comparison.

use exactsim::synth::erdos_renyi_digraph;
use exactsim::{
    max_error, pool_evaluate, power_method, precision_at_k, single_source, top_k,
    parsim_single_source, QueryOptions,
};

fn main() -> exactsim::Result<()> {
    let c = 0.6;
    let g = erdos_renyi_digraph(150, 5.0, 23);
    let source = 3;
    let k = 10;

    let truth = power_method(&g, c, 60, 10_000)?;
    let truth_row = truth.row(source);

    let opts = QueryOptions {
        seed: 8,
        sample_override: Some(200_000),
        ..QueryOptions::new(1e-3)
    };
    let exact = single_source(&g, source, &opts)?.scores;
    let parsim = parsim_single_source(&g, source, c, 30)?;

    for (name, scores) in [("exactsim", &exact), ("parsim", &parsim)] {
        let me = max_error(scores, truth_row)?;
        let ranking = top_k(scores, k, Some(source));
        let prec = precision_at_k(&ranking, truth_row, k, Some(source));
        println!("{name:>9}: max_error={me:.2e} precision@{k}={prec:.2}");
    }

    // pooling: merge both top-k sets and re-score against the verifier
    let rankings = [
        top_k(&exact, k, Some(source)),
        top_k(&parsim, k, Some(source)),
    ];
    let pooled = pool_evaluate(&rankings, k, truth_row, Some(source))?;
    println!("pooled relative precision: exactsim={:.2} parsim={:.2}", pooled[0], pooled[1]);
    Ok(())
}
