//! Parse a whitespace edge list, inspect the graph, and round-trip it
//! through the binary cache format.

use exactsim::{EdgeListOptions, Graph};

fn main() -> exactsim::Result<()> {
    let dir = std::env::temp_dir().join("exactsim_example_convert");
    std::fs::create_dir_all(&dir).unwrap();
    let edges = dir.join("toy.txt");
    std::fs::write(
        &edges,
        "# a toy citation graph with arbitrary node labels\n\
         100 200\n\
         100 300\n\
         200 300\n\
         300 100\n\
         42 300\n",
    )
    .unwrap();

    let g = Graph::load_edge_list(&edges, EdgeListOptions::default())?;
    println!("loaded {} nodes, {} arcs", g.node_count(), g.arc_count());
    for k in 0..g.node_count() as u32 {
        println!(
            "  node {k} (label {}): d_in={} d_out={}",
            g.label(k),
            g.in_degree(k),
            g.out_degree(k)
        );
    }

    let cache = dir.join("toy.bin");
    g.save_cache(&cache)?;
    let reloaded = Graph::load_cache(&cache)?;
    assert_eq!(reloaded.node_count(), g.node_count());
    assert_eq!(reloaded.arc_count(), g.arc_count());
    println!("cache round trip ok: {}", cache.display());

    // the same file read as an undirected graph doubles the arcs
    let und = Graph::load_edge_list(
        &edges,
        EdgeListOptions {
            undirected: true,
            ..EdgeListOptions::default()
        },
    )?;
    println!("undirected view: {} arcs", und.arc_count());
    Ok(())
}
