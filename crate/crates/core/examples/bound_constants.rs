//! Constants of the non-asymptotic convergence bound for a random network,
//! next to the gaps actually observed.
//!
//! ```bash
//! cargo run --release --example bound_constants
//! ```

use graphon_linkpred::analysis::{bound_constants, convergence_sweep, default_p, BoundMode, NodeInit, SweepMode};
use graphon_linkpred::mpnn::{Aggregation, Mpnn};
use graphon_linkpred::node_mpnn::degree_signal;
use graphon_linkpred::sbm::SbmSpec;

fn main() -> graphon_linkpred::Result<()> {
    let base = SbmSpec::reference();
    let spec = base.with_signal(degree_signal(&base))?;
    let f_inf = spec.b.fold(0.0f64, |m, v| m.max(v.abs()));
    let seeds: Vec<u64> = (0..10).collect();
    for (agg, mode, sweep) in [
        (Aggregation::NeighborAverage, BoundMode::NodeMean, SweepMode::NodeMean),
        (Aggregation::NormalizedSum, BoundMode::NodeSum, SweepMode::NodeSum),
    ] {
        let mpnn = Mpnn::graphsage(&[1, 10, 10], 10, agg, 0)?;
        let p = default_p(&mpnn);
        let rep = bound_constants(&mpnn, f_inf, &spec, p, mode, 1024)?;
        println!("{mode:?}: p {p:.2e}  C1 {:.3e}  C2 {:.3e}  confidence {:.3}", rep.c1, rep.c2, rep.confidence);
        for (l, lb) in rep.layers.iter().enumerate() {
            println!("  layer {l}: L_phi {:.3} L_psi {:.3}  |f| <= {:.3} + {:.3}|f0|", lb.l_phi, lb.l_psi, lb.b1_out, lb.b2_out);
        }
        for n in [256, 1024, 4096] {
            let recs = convergence_sweep(&spec, &mpnn, sweep, NodeInit::Signal, &[n], &seeds)?;
            let worst = recs.iter().map(|r| r.delta).fold(0.0, f64::max);
            println!("  n = {n:>4}  bound {:.3e}  worst observed gap {worst:.3e}", rep.bound_at(n));
        }
    }
    Ok(())
}
