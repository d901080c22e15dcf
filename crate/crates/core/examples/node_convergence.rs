//! Gap between a random GraphSAGE-style network on sampled graphs and the
//! same network on the graphon, as the graph grows.
//!
//! ```bash
//! cargo run --release --example node_convergence
//! ```

use graphon_linkpred::analysis::{convergence_sweep, loglog_slope, medians_by_n, NodeInit, SweepMode};
use graphon_linkpred::mpnn::{Aggregation, Mpnn};
use graphon_linkpred::sbm::SbmSpec;

fn main() -> graphon_linkpred::Result<()> {
    let spec = SbmSpec::reference();
    let mpnn = Mpnn::graphsage(&[1, 10, 10], 10, Aggregation::NeighborAverage, 0)?;
    let sizes: Vec<usize> = (5..=12).map(|e| 1 << e).collect();
    let seeds: Vec<u64> = (0..5).collect();
    for mode in [SweepMode::NodeMean, SweepMode::NodeSum] {
        let records = convergence_sweep(&spec, &mpnn, mode, NodeInit::Degree, &sizes, &seeds)?;
        println!("{}", mode.name());
        for (n, d) in medians_by_n(&records) {
            println!("  n = {n:>5}  median delta = {d:.5}");
        }
        let fit = loglog_slope(&records)?;
        println!("  slope {:.3}  (r2 {:.3})", fit.slope, fit.r2);
    }
    Ok(())
}
