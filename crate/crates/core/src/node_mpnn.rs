//! Node-level message passing: the discrete pass on a sampled graph and the
//! exact continuous pass on SBM blocks.

use std::fmt::Write as _;

use ndarray::{s, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mpnn::{Aggregation, MessageFn, Mpnn, MpnnLayer};
use crate::nn::ForwardCache;
use crate::sbm::sorted_sum;
use crate::sbm::{graphon_degree, validate_sbm, GraphStats, SampledGraph, SbmSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    Discrete,
    ContinuousSampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddings {
    pub values: Array2<f64>,
    pub kind: EmbeddingKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEmbeddings {
    pub values: Array2<f64>,
}

/// Per-node weight on the neighbor sum: `1/(N d_i)` for neighbor averaging
/// (zero for isolated nodes), `1/N` for the normalized sum.
fn node_weights(graph: &SampledGraph, stats: &GraphStats, agg: Aggregation) -> Vec<f64> {
    let n = graph.n as f64;
    match agg {
        Aggregation::NeighborAverage => {
            let isolated = stats.degrees.iter().filter(|&&d| d == 0.0).count();
            if isolated > 0 {
                log::debug!("{isolated} isolated nodes receive a zero message");
            }
            stats
                .degrees
                .iter()
                .map(|&d| if d == 0.0 { 0.0 } else { 1.0 / (n * d) })
                .collect()
        }
        Aggregation::NormalizedSum => vec![1.0 / n; graph.n],
    }
}

fn aggregate(
    layer: &MpnnLayer,
    graph: &SampledGraph,
    weights: &[f64],
    f: &Array2<f64>,
) -> Result<Array2<f64>> {
    let h = layer.msg_width;
    let rows: Vec<Result<Vec<f64>>> = (0..graph.n)
        .into_par_iter()
        .map(|i| {
            let nbrs = &graph.neighbors[i];
            let mut acc = vec![0.0; h];
            if nbrs.is_empty() || weights[i] == 0.0 {
                return Ok(acc);
            }
            match &layer.phi {
                MessageFn::Neighbor => {
                    for &j in nbrs {
                        for (a, v) in acc.iter_mut().zip(f.row(j)) {
                            *a += v;
                        }
                    }
                }
                MessageFn::Net(_) => {
                    let xi = f.row(i).insert_axis(Axis(0));
                    let x = xi.broadcast((nbrs.len(), f.ncols())).unwrap();
                    let y = f.select(Axis(0), nbrs);
                    let msgs = layer.message(x, y.view())?;
                    for row in msgs.rows() {
                        for (a, v) in acc.iter_mut().zip(row) {
                            *a += v;
                        }
                    }
                }
            }
            for a in &mut acc {
                *a *= weights[i];
            }
            Ok(acc)
        })
        .collect();
    let mut m = Array2::zeros((graph.n, h));
    for (i, row) in rows.into_iter().enumerate() {
        m.row_mut(i).assign(&ndarray::Array1::from(row?));
    }
    Ok(m)
}

/// Discrete node MPNN on `graph` starting from `graph.node_features`.
pub fn gmpnn_node(graph: &SampledGraph, stats: &GraphStats, mpnn: &Mpnn) -> Result<NodeEmbeddings> {
    check_input(graph, mpnn)?;
    let weights = node_weights(graph, stats, mpnn.aggregation);
    let mut f = graph.node_features.clone();
    for layer in &mpnn.layers {
        let m = aggregate(layer, graph, &weights, &f)?;
        f = layer.update(f.view(), m.view())?;
    }
    Ok(NodeEmbeddings {
        values: f,
        kind: EmbeddingKind::Discrete,
    })
}

fn check_input(graph: &SampledGraph, mpnn: &Mpnn) -> Result<()> {
    if graph.node_features.ncols() != mpnn.in_width() {
        return Err(Error::Shape(format!(
            "node features have width {}, network expects {}",
            graph.node_features.ncols(),
            mpnn.in_width()
        )));
    }
    Ok(())
}

/// Continuous node MPNN evaluated exactly on the blocks of `spec`, from the
/// per-block signal `init` (`r x F_0`).
pub fn cmpnn_node_sbm(spec: &SbmSpec, mpnn: &Mpnn, init: &Array2<f64>) -> Result<BlockEmbeddings> {
    let report = validate_sbm(spec)?;
    let r = spec.r();
    if init.dim() != (r, mpnn.in_width()) {
        return Err(Error::Shape(format!(
            "block signal has shape {:?}, expected ({r}, {})",
            init.dim(),
            mpnn.in_width()
        )));
    }
    if mpnn.aggregation == Aggregation::NeighborAverage && !report.node_ok {
        return Err(Error::Precondition(format!(
            "neighbor averaging needs d_min > 0, got {}",
            report.d_min
        )));
    }
    let d_w = graphon_degree(spec);
    let mut f = init.clone();
    for layer in &mpnn.layers {
        let mut g = Array2::zeros((r, layer.msg_width));
        for a in 0..r {
            let x = f.row(a).insert_axis(Axis(0));
            let msgs = layer.message(x.broadcast((r, f.ncols())).unwrap(), f.view())?;
            for k in 0..layer.msg_width {
                let mut v = sorted_sum((0..r).map(|b| spec.block_mass[b] * spec.s[[a, b]] * msgs[[b, k]]));
                if mpnn.aggregation == Aggregation::NeighborAverage {
                    v /= d_w[a];
                }
                g[[a, k]] = v;
            }
        }
        f = layer.update(f.view(), g.view())?;
    }
    Ok(BlockEmbeddings { values: f })
}

/// Graphon degree per block as an `r x 1` signal, the continuous
/// counterpart of degree features.
pub fn degree_signal(spec: &SbmSpec) -> Array2<f64> {
    graphon_degree(spec).insert_axis(Axis(1))
}

/// Row `i` is the embedding of node `i`'s block.
pub fn lift_block_embeddings(block: &BlockEmbeddings, graph: &SampledGraph) -> Result<NodeEmbeddings> {
    if let Some(&b) = graph.block_of.iter().find(|&&b| b >= block.values.nrows()) {
        return Err(Error::Shape(format!(
            "graph uses block {b} but only {} block embeddings given",
            block.values.nrows()
        )));
    }
    Ok(NodeEmbeddings {
        values: block.values.select(Axis(0), &graph.block_of),
        kind: EmbeddingKind::ContinuousSampled,
    })
}

/// CSV with one row per node and columns `f_1..f_F`.
pub fn node_embeddings_csv(emb: &NodeEmbeddings) -> String {
    let mut s = String::new();
    let cols: Vec<String> = (1..=emb.values.ncols()).map(|k| format!("f_{k}")).collect();
    writeln!(s, "{}", cols.join(",")).unwrap();
    for row in emb.values.rows() {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(s, "{}", vals.join(",")).unwrap();
    }
    s
}

/// Forward record of a node MPNN whose messages are all `Φ(x, y) = y`,
/// for end-to-end training.
pub struct NodeTrace {
    inputs: Vec<Array2<f64>>,
    psi_caches: Vec<Option<ForwardCache>>,
    weights: Vec<f64>,
    pub output: Array2<f64>,
}

/// Forward pass recording what [`node_backward`] needs.
pub fn node_forward_trace(
    graph: &SampledGraph,
    stats: &GraphStats,
    mpnn: &Mpnn,
) -> Result<NodeTrace> {
    check_input(graph, mpnn)?;
    if !mpnn.neighbor_messages() {
        return Err(Error::Precondition(
            "backpropagation through node layers requires neighbor messages".into(),
        ));
    }
    let weights = node_weights(graph, stats, mpnn.aggregation);
    let mut f = graph.node_features.clone();
    let mut inputs = Vec::new();
    let mut psi_caches = Vec::new();
    for layer in &mpnn.layers {
        let m = aggregate(layer, graph, &weights, &f)?;
        let (next, cache) = match &layer.psi {
            crate::mpnn::UpdateFn::Net(net) => {
                let z = ndarray::concatenate![Axis(1), f, m];
                let c = net.forward_batch(z.view())?;
                (c.output().clone(), Some(c))
            }
            _ => (layer.update(f.view(), m.view())?, None),
        };
        inputs.push(f);
        psi_caches.push(cache);
        f = next;
    }
    Ok(NodeTrace {
        inputs,
        psi_caches,
        weights,
        output: f,
    })
}

/// Gradients of `Σ ⟨grad_out, output⟩` with respect to the MPNN parameters,
/// flattened in [`Mpnn::params`] order.
pub fn node_backward(
    graph: &SampledGraph,
    mpnn: &Mpnn,
    trace: &NodeTrace,
    grad_out: ArrayView2<f64>,
) -> Result<Vec<f64>> {
    let mut per_layer: Vec<Vec<f64>> = vec![Vec::new(); mpnn.depth()];
    let mut g = grad_out.to_owned();
    for (t, layer) in mpnn.layers.iter().enumerate().rev() {
        let f_in = &trace.inputs[t];
        let (g_f, g_m) = match (&layer.psi, &trace.psi_caches[t]) {
            (crate::mpnn::UpdateFn::Net(net), Some(cache)) => {
                let (grads, gz) = net.backward_batch(cache, g.view())?;
                per_layer[t] = grads.flatten();
                let w = layer.in_width;
                (gz.slice(s![.., ..w]).to_owned(), gz.slice(s![.., w..]).to_owned())
            }
            (crate::mpnn::UpdateFn::Message, _) => (Array2::zeros(f_in.dim()), g.clone()),
            _ => {
                return Err(Error::Precondition(
                    "backpropagation supports message and net updates only".into(),
                ))
            }
        };
        // m_i = w_i Σ_{j ∈ N(i)} f_j, so ∂/∂f_j collects w_i g_m[i] over i ∈ N(j)
        let mut g_prev = g_f;
        for (i, nbrs) in graph.neighbors.iter().enumerate() {
            let wi = trace.weights[i];
            if wi == 0.0 {
                continue;
            }
            let gi = g_m.row(i).to_owned();
            for &j in nbrs {
                g_prev.row_mut(j).scaled_add(wi, &gi);
            }
        }
        g = g_prev;
    }
    Ok(per_layer.concat())
}
