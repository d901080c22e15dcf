//! Pairwise embeddings with `Φ(x, y) = y`, `Ψ(x, m) = x / m` converge to the
//! block embeddings, which themselves approach the edge probabilities.
//!
//! ```bash
//! cargo run --release --example pair_convergence [depth]
//! ```

use graphon_linkpred::analysis::{convergence_sweep, loglog_slope, medians_by_n, NodeInit, SweepMode};
use graphon_linkpred::mpnn::fixed_psi_mpnn;
use graphon_linkpred::pair_mpnn::{cmpnn_pair_sbm, ones_pair_signal};
use graphon_linkpred::sbm::SbmSpec;

fn main() -> graphon_linkpred::Result<()> {
    let spec = SbmSpec::reference();

    println!("block recursion from all ones:");
    for t in [1, 2, 5, 20] {
        let out = cmpnn_pair_sbm(&spec, &fixed_psi_mpnn(t)?, &ones_pair_signal(3, 1))?;
        let err = (&out.channels[0] - &spec.s)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        println!("  T = {t:>2}  max |F - S| = {err:.2e}");
    }

    let depth: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let mpnn = fixed_psi_mpnn(depth)?;
    let sizes: Vec<usize> = (5..=11).map(|e| 1 << e).collect();
    let seeds: Vec<u64> = (0..5).collect();
    let records = convergence_sweep(&spec, &mpnn, SweepMode::PairFixed, NodeInit::Degree, &sizes, &seeds)?;
    println!("discrete vs continuous, T = {depth}:");
    for (n, d) in medians_by_n(&records) {
        println!("  n = {n:>5}  median delta = {d:.5}");
    }
    let fit = loglog_slope(&records)?;
    println!("  slope {:.3}  (r2 {:.3})", fit.slope, fit.r2);
    Ok(())
}
