//! Validate a three-block model, sample a graph from it and compare the
//! empirical block shares and degrees with their graphon values.
//!
//! ```bash
//! cargo run --release --example sample_sbm -- 2000
//! ```

use graphon_linkpred::sbm::{degree_stats, graphon_degree, isomorphic_block_pairs, sample_graph, validate_sbm, SbmSpec};

fn main() -> graphon_linkpred::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let spec = SbmSpec::reference();
    let report = validate_sbm(&spec)?;
    println!("d_min {:.4}  d_cmin {:.4}", report.d_min, report.d_cmin);
    println!("isomorphic block pairs {:?}", isomorphic_block_pairs(&spec, 1e-9));

    let g = sample_graph(&spec, n, 42)?;
    let stats = degree_stats(&g);
    let d_w = graphon_degree(&spec);
    println!("n = {n}, {} edges", g.num_edges());
    println!("block  share   mass   mean degree  graphon degree");
    for a in 0..spec.r() {
        let members: Vec<usize> = (0..n).filter(|&i| g.block_of[i] == a).collect();
        let mean = members.iter().map(|&i| stats.degrees[i]).sum::<f64>() / members.len() as f64;
        println!(
            "{a:>5}  {:.3}   {:.3}  {mean:>11.4}  {:>14.4}",
            members.len() as f64 / n as f64,
            spec.block_mass[a],
            d_w[a]
        );
    }
    Ok(())
}
