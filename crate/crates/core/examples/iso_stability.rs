//! Embedding gaps between nodes of isomorphic blocks shrink with the graph
//! size; gaps between non-isomorphic blocks do not.
//!
//! ```bash
//! cargo run --release --example iso_stability
//! ```

use graphon_linkpred::analysis::{iso_gap_stats, summarize};
use graphon_linkpred::mpnn::{Aggregation, Mpnn};
use graphon_linkpred::node_mpnn::gmpnn_node;
use graphon_linkpred::sbm::{degree_stats, isomorphic_block_pairs, sample_graph, SbmSpec};

fn main() -> graphon_linkpred::Result<()> {
    let spec = SbmSpec::reference();
    let iso = isomorphic_block_pairs(&spec, 1e-9);
    let mpnn = Mpnn::graphsage(&[1, 10, 10], 10, Aggregation::NeighborAverage, 0)?;
    println!("    n   iso median   non-iso median");
    for n in [256, 512, 1024, 2048, 4096] {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for seed in 0..5 {
            let g = sample_graph(&spec, n, seed)?.with_degree_features();
            let emb = gmpnn_node(&g, &degree_stats(&g), &mpnn)?;
            let st = iso_gap_stats(&emb, &g, &iso, 1000, seed)?;
            a.extend(st.iso);
            b.extend(st.non_iso);
        }
        println!("{n:>5}   {:.3e}    {:.3e}", summarize(&a).median, summarize(&b).median);
    }
    Ok(())
}
