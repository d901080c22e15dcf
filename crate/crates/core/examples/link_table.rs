//! Link prediction with node and pairwise embeddings across the transductive,
//! inductive and size-shifted scenarios, next to the oracle.
//!
//! ```bash
//! cargo run --release --example link_table [runs]
//! ```

use std::time::Instant;

use graphon_linkpred::linkpred::{run_table, TableConfig};
use graphon_linkpred::sbm::SbmSpec;

fn main() -> graphon_linkpred::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let cfg = TableConfig {
        runs,
        ..TableConfig::default()
    };
    let start = Instant::now();
    let table = run_table(&SbmSpec::reference_link_prediction(), &cfg)?;
    print!("{}", table.to_text());
    for r in &table.records {
        if let Some(e) = r.best_epoch {
            println!("run {} {:?} {:?}: best epoch {e}", r.run, r.method, r.scenario);
        }
    }
    println!("{} runs in {:.1} s", runs, start.elapsed().as_secs_f64());
    Ok(())
}
