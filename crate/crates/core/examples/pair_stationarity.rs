//! With `Φ(x, y) = y` and `Ψ(x, m) = x / m`, the edge-probability matrix is
//! a fixed point of the continuous pairwise recursion, and on sampled
//! graphs the pairwise features approach it.
//!
//! ```bash
//! cargo run --release --example pair_stationarity
//! ```

use graphon_linkpred::analysis::delta_pair_offdiag;
use graphon_linkpred::mpnn::fixed_psi_mpnn;
use graphon_linkpred::pair_mpnn::{cmpnn_pair_sbm, gmpnn_pair, lift_block_pair, ones_pair_signal};
use graphon_linkpred::sbm::{graph_stats, sample_graph, SbmSpec};

fn main() -> graphon_linkpred::Result<()> {
    let spec = SbmSpec::reference();
    let mpnn = fixed_psi_mpnn(3)?;
    let fixed = cmpnn_pair_sbm(&spec, &mpnn, &[spec.s.clone()])?;
    let err = fixed.channels[0]
        .iter()
        .zip(spec.s.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("from S, three layers: max |f - S| = {err:.2e}");

    let two = fixed_psi_mpnn(2)?;
    let from_ones = cmpnn_pair_sbm(&spec, &two, &ones_pair_signal(spec.r(), 1))?;
    println!("from all ones, two layers:\n{:.4}", from_ones.channels[0]);
    for n in [128, 256, 512, 1024] {
        let g = sample_graph(&spec, n, 1)?;
        let disc = gmpnn_pair(&g, &graph_stats(&g), &two)?;
        let cont = lift_block_pair(&from_ones, &g)?;
        println!("n = {n:>4}  off-diagonal gap {:.4}", delta_pair_offdiag(&disc, &cont)?);
    }
    Ok(())
}
