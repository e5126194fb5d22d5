//! Frozen oracle values and cross-checks between independent
//! implementations of the same quantities.

mod common;

use common::{brute_z_tables, dense_pair_diag, random_digraph};
use exactsim::diag::local_z_tables_capped;
use exactsim::{pair_chain_diag_oracle, power_method, Graph};

const C: f64 = 0.6;

fn k3() -> Graph {
    Graph::from_arcs(3, &[(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)])
}

/// Hand-derived constants, frozen before the library code was written.
#[test]
fn frozen_constants() {
    // 2-cycle: forced co-location at step 1, D = 1 - c
    assert!((dense_pair_diag(&Graph::from_arcs(2, &[(0, 1), (1, 0)]), 0, C) - 0.4).abs() < 1e-12);
    // directed K3: absorbing-chain solve B = 3/11, A = c(1+B)/2, D = 1-A = 34/55
    assert!((dense_pair_diag(&k3(), 0, C) - 34.0 / 55.0).abs() < 1e-12);
    // brute-force path pairs on K3: Z1 = 0.3, Z2 = {0: 0.045}
    let z = brute_z_tables(&k3(), 0, C, 2);
    assert!((z[0][&1] - 0.15).abs() < 1e-15);
    assert!((z[0][&2] - 0.15).abs() < 1e-15);
    assert!((z[1][&0] - 0.045).abs() < 1e-15);
    assert_eq!(z[1].len(), 1);
}

#[test]
fn library_oracle_matches_dense_dp() {
    for seed in 0..10 {
        let g = random_digraph(6 + seed as usize * 4, 30 + seed as usize * 10, seed);
        for k in 0..g.node_count() as u32 {
            let lib = pair_chain_diag_oracle(&g, k, C, 1e-13).unwrap();
            let dp = dense_pair_diag(&g, k, C);
            assert!((lib - dp).abs() < 1e-10, "seed={seed} k={k}: {lib} vs {dp}");
        }
    }
}

#[test]
fn z_tables_match_brute_force_on_fixtures() {
    for (name, g) in [
        ("k3", k3()),
        ("two_cycle", Graph::from_arcs(2, &[(0, 1), (1, 0)])),
        ("fan", Graph::from_arcs(4, &[(0, 3), (1, 3), (2, 3), (3, 0), (3, 1)])),
    ] {
        for k in 0..g.node_count() as u32 {
            let brute = brute_z_tables(&g, k, C, 4);
            let (_, z) = local_z_tables_capped(&g, k, C, u64::MAX / 2, 4);
            for level in 1..=4usize {
                let lib = z.levels.get(level - 1);
                for q in 0..g.node_count() as u32 {
                    let b = brute[level - 1].get(&q).copied().unwrap_or(0.0);
                    let l = lib.and_then(|m| m.get(&q)).copied().unwrap_or(0.0);
                    assert!(
                        (b - l).abs() < 1e-12,
                        "{name} k={k} level={level} q={q}: {l} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn power_method_k3_frozen() {
    // closed form: off-diagonal fixed point s = c(3s+1)/4 => s = 3/11
    let s = power_method(&k3(), C, 60, 10_000).unwrap();
    assert!((s.get(0, 1) - 3.0 / 11.0).abs() < 1e-12);
}

#[test]
fn diag_oracle_equals_one_minus_meet_probability() {
    // the pair-walk meet probability from the same start is 1 - D(k,k);
    // frozen K3 value 21/55
    let d = dense_pair_diag(&k3(), 0, C);
    assert!((1.0 - d - 21.0 / 55.0).abs() < 1e-12);
}
