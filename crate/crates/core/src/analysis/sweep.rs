use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::delta::delta_node;
use crate::error::{Error, Result};
use crate::mpnn::{Aggregation, Mpnn};
use crate::node_mpnn::{cmpnn_node_sbm, degree_signal, gmpnn_node, lift_block_embeddings};
use crate::pair_mpnn::{cmpnn_pair_sbm, gmpnn_pair, ones_pair_signal, pair_cap};
use crate::rng::derive_seed;
use crate::sbm::{degree_stats, graph_stats, sample_graph, SbmSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    NodeMean,
    NodeSum,
    PairFixed,
    PairNet,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::NodeMean => "node_mean",
            SweepMode::NodeSum => "node_sum",
            SweepMode::PairFixed => "pair_fixed",
            SweepMode::PairNet => "pair_net",
        }
    }

    pub fn is_pair(self) -> bool {
        matches!(self, SweepMode::PairFixed | SweepMode::PairNet)
    }
}

/// Feature initialization for node sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeInit {
    /// Normalized degrees on the graph, graphon degrees on the blocks.
    Degree,
    /// The block signal of the spec on both sides.
    Signal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub mode: SweepMode,
    pub n: usize,
    pub seed: u64,
    pub delta: f64,
}

/// Seed of the graph drawn for `(n, seed)` in sweeps.
pub fn sweep_graph_seed(seed: u64, n: usize) -> u64 {
    derive_seed(seed, &format!("graph-{n}"))
}

/// Discrete vs continuous gap for every `(n, seed)`, in that order.
pub fn convergence_sweep(
    spec: &SbmSpec,
    mpnn: &Mpnn,
    mode: SweepMode,
    init: NodeInit,
    n_list: &[usize],
    seeds: &[u64],
) -> Result<Vec<ConvergenceRecord>> {
    let mut mpnn = mpnn.clone();
    match mode {
        SweepMode::NodeMean => mpnn.aggregation = Aggregation::NeighborAverage,
        SweepMode::NodeSum => mpnn.aggregation = Aggregation::NormalizedSum,
        SweepMode::PairFixed | SweepMode::PairNet => {
            let cap = pair_cap(&mpnn);
            if let Some(&n) = n_list.iter().find(|&&n| n > cap) {
                return Err(Error::Precondition(format!(
                    "pairwise sweep capped at n = {cap}, got {n}"
                )));
            }
        }
    }
    if mode == SweepMode::PairFixed && !mpnn.is_symbolic() {
        return Err(Error::Precondition("pair_fixed mode expects a symbolic network".into()));
    }

    let node_block = if mode.is_pair() {
        None
    } else {
        let signal = match init {
            NodeInit::Degree => degree_signal(spec),
            NodeInit::Signal => spec.b.clone(),
        };
        Some(cmpnn_node_sbm(spec, &mpnn, &signal)?)
    };
    let pair_block = if mode.is_pair() {
        Some(cmpnn_pair_sbm(spec, &mpnn, &ones_pair_signal(spec.r(), mpnn.in_width()))?)
    } else {
        None
    };

    let jobs: Vec<(usize, u64)> = n_list
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    jobs.par_iter()
        .map(|&(n, seed)| {
            let graph = sample_graph(spec, n, sweep_graph_seed(seed, n))?;
            let delta = if let Some(block) = &node_block {
                let graph = match init {
                    NodeInit::Degree => graph.with_degree_features(),
                    NodeInit::Signal => graph,
                };
                let discrete = gmpnn_node(&graph, &degree_stats(&graph), &mpnn)?;
                delta_node(&discrete, &lift_block_embeddings(block, &graph)?)?
            } else {
                let block = pair_block.as_ref().expect("pair mode");
                let discrete = gmpnn_pair(&graph, &graph_stats(&graph), &mpnn)?;
                let bo = &graph.block_of;
                let mut m: f64 = 0.0;
                for (dk, ck) in discrete.channels.iter().zip(&block.channels) {
                    for ((i, j), v) in dk.indexed_iter() {
                        if i != j {
                            m = m.max((v - ck[[bo[i], bo[j]]]).abs());
                        }
                    }
                }
                m
            };
            Ok(ConvergenceRecord {
                mode,
                n,
                seed,
                delta,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::delta_pair_offdiag;
    use crate::mpnn::fixed_psi_mpnn;
    use crate::pair_mpnn::lift_block_pair;

    #[test]
    fn single_record() {
        let spec = SbmSpec::reference();
        let mpnn = Mpnn::graphsage(&[1, 4, 4], 6, Aggregation::NeighborAverage, 1).unwrap();
        let recs =
            convergence_sweep(&spec, &mpnn, SweepMode::NodeMean, NodeInit::Degree, &[32], &[0])
                .unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].n, 32);
        assert!(recs[0].delta > 0.0);
    }

    #[test]
    fn pair_gap_matches_lifted_delta() {
        let spec = SbmSpec::reference();
        let mpnn = fixed_psi_mpnn(2).unwrap();
        let rec =
            convergence_sweep(&spec, &mpnn, SweepMode::PairFixed, NodeInit::Degree, &[48], &[3])
                .unwrap()[0];
        let g = sample_graph(&spec, 48, sweep_graph_seed(3, 48)).unwrap();
        let d = gmpnn_pair(&g, &graph_stats(&g), &mpnn).unwrap();
        let c = cmpnn_pair_sbm(&spec, &mpnn, &ones_pair_signal(3, 1)).unwrap();
        let want = delta_pair_offdiag(&d, &lift_block_pair(&c, &g).unwrap()).unwrap();
        assert_eq!(rec.delta, want);
    }

    #[test]
    fn deterministic_order() {
        let spec = SbmSpec::reference();
        let mpnn = Mpnn::graphsage(&[1, 3], 4, Aggregation::NormalizedSum, 2).unwrap();
        let a = convergence_sweep(&spec, &mpnn, SweepMode::NodeSum, NodeInit::Degree, &[32, 64], &[0, 1])
            .unwrap();
        let b = convergence_sweep(&spec, &mpnn, SweepMode::NodeSum, NodeInit::Degree, &[32, 64], &[0, 1])
            .unwrap();
        assert_eq!(a, b);
        let order: Vec<(usize, u64)> = a.iter().map(|r| (r.n, r.seed)).collect();
        assert_eq!(order, vec![(32, 0), (32, 1), (64, 0), (64, 1)]);
    }
}
