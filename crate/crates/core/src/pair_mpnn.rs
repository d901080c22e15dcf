//! Pairwise message passing.
//!
//! The discrete pass keeps a dense `n x n` feature map per channel, starting
//! from all ones. With `Φ(x, y) = y` the neighbor sums
//! `Σ_z A_jz f_iz` are the matrix product `F A`, which is what makes large
//! graphs tractable; net-valued Φ falls back to explicit loops.

use std::fmt::Write as _;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mpnn::{MessageFn, Mpnn, MpnnLayer, UpdateFn};
use crate::nn::ForwardCache;
use crate::sbm::{graphon_common_neighbors, validate_sbm, GraphStats, SampledGraph, SbmSpec};

pub const PAIR_CAP_GENERAL: usize = 4096;
pub const PAIR_CAP_FAST: usize = 8192;

/// Dense pairwise features, one `n x n` matrix per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEmbeddings {
    pub channels: Vec<Array2<f64>>,
}

/// Pairwise features per block pair, one `r x r` matrix per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPairEmbeddings {
    pub channels: Vec<Array2<f64>>,
}

impl PairEmbeddings {
    pub fn n(&self) -> usize {
        self.channels[0].nrows()
    }

    pub fn width(&self) -> usize {
        self.channels.len()
    }

    pub fn at(&self, i: usize, j: usize) -> Vec<f64> {
        self.channels.iter().map(|c| c[[i, j]]).collect()
    }

    /// Rows `f_ij` for the requested pairs, shape `(pairs, width)`.
    pub fn gather(&self, pairs: &[(usize, usize)]) -> Array2<f64> {
        Array2::from_shape_fn((pairs.len(), self.width()), |(p, k)| {
            let (i, j) = pairs[p];
            self.channels[k][[i, j]]
        })
    }
}

/// Largest graph accepted by [`gmpnn_pair`] for this network.
pub fn pair_cap(mpnn: &Mpnn) -> usize {
    if mpnn.is_symbolic() && mpnn.neighbor_messages() {
        PAIR_CAP_FAST
    } else {
        PAIR_CAP_GENERAL
    }
}

/// `1 / (2 N c_A)`.
fn pair_norm(graph: &SampledGraph, stats: &GraphStats) -> Result<Array2<f64>> {
    let c = stats.common_neighbors.as_ref().ok_or_else(|| {
        Error::Precondition("pairwise passes need common-neighbor statistics".into())
    })?;
    if c.nrows() != graph.n {
        return Err(Error::Shape(format!(
            "common-neighbor matrix is {}x{}, graph has {} nodes",
            c.nrows(),
            c.ncols(),
            graph.n
        )));
    }
    let two_n = 2.0 * graph.n as f64;
    Ok(c.mapv(|v| 1.0 / (two_n * v)))
}

/// `(P + Pᵀ) ⊙ R` with `P = F A`.
fn neighbor_message(f: &Array2<f64>, adj: &Array2<f64>, norm: &Array2<f64>) -> Array2<f64> {
    let p = f.dot(adj);
    let mut m = &p + &p.t();
    m *= norm;
    m
}

fn net_messages(
    layer: &MpnnLayer,
    graph: &SampledGraph,
    norm: &Array2<f64>,
    f: &[Array2<f64>],
) -> Result<Vec<Array2<f64>>> {
    let n = graph.n;
    let fw = f.len();
    let h = layer.msg_width;
    let feat = |i: usize, j: usize| -> Vec<f64> { f.iter().map(|c| c[[i, j]]).collect() };
    let rows: Vec<Result<Array2<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Array2::zeros((n, h));
            for j in 0..n {
                let fij = feat(i, j);
                let count = graph.neighbors[j].len() + graph.neighbors[i].len();
                if count == 0 {
                    continue;
                }
                let mut x = Array2::zeros((count, fw));
                let mut y = Array2::zeros((count, fw));
                let mut r = 0;
                for &z in &graph.neighbors[j] {
                    x.row_mut(r).assign(&ndarray::aview1(&fij));
                    y.row_mut(r).assign(&ndarray::aview1(&feat(i, z)));
                    r += 1;
                }
                for &z in &graph.neighbors[i] {
                    x.row_mut(r).assign(&ndarray::aview1(&fij));
                    y.row_mut(r).assign(&ndarray::aview1(&feat(j, z)));
                    r += 1;
                }
                let msgs = layer.message(x.view(), y.view())?;
                let mut row = out.row_mut(j);
                for mrow in msgs.rows() {
                    row += &mrow;
                }
                row *= norm[[i, j]];
            }
            Ok(out)
        })
        .collect();
    let mut m = vec![Array2::zeros((n, n)); h];
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        for (k, mk) in m.iter_mut().enumerate() {
            mk.row_mut(i).assign(&row.column(k));
        }
    }
    Ok(m)
}

fn row_features(chans: &[Array2<f64>], i: usize) -> Array2<f64> {
    let n = chans[0].ncols();
    let mut x = Array2::zeros((n, chans.len()));
    for (k, c) in chans.iter().enumerate() {
        x.column_mut(k).assign(&c.row(i));
    }
    x
}

fn apply_update(layer: &MpnnLayer, f: &[Array2<f64>], m: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
    match &layer.psi {
        UpdateFn::Message => Ok(m.to_vec()),
        UpdateFn::Ratio => Ok(f
            .iter()
            .zip(m)
            .map(|(fk, mk)| {
                let mut out = fk.clone();
                out.zip_mut_with(mk, |a, &b| *a = crate::mpnn::ratio_psi(*a, b));
                out
            })
            .collect()),
        UpdateFn::Net(net) => {
            let n = f[0].nrows();
            let rows: Vec<Result<Array2<f64>>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let z = ndarray::concatenate![Axis(1), row_features(f, i), row_features(m, i)];
                    net.eval_batch(z.view())
                })
                .collect();
            let mut out = vec![Array2::zeros((n, n)); layer.out_width];
            for (i, row) in rows.into_iter().enumerate() {
                let row = row?;
                for (k, ok) in out.iter_mut().enumerate() {
                    ok.row_mut(i).assign(&row.column(k));
                }
            }
            Ok(out)
        }
    }
}

fn check_pair_input(graph: &SampledGraph, mpnn: &Mpnn, cap: usize) -> Result<()> {
    if graph.n > cap {
        return Err(Error::Precondition(format!(
            "pairwise pass capped at n = {cap}, got {}",
            graph.n
        )));
    }
    if mpnn.in_width() == 0 {
        return Err(Error::Shape("pairwise network has zero input width".into()));
    }
    Ok(())
}

/// Discrete pairwise MPNN from the all-ones initialization.
pub fn gmpnn_pair(graph: &SampledGraph, stats: &GraphStats, mpnn: &Mpnn) -> Result<PairEmbeddings> {
    gmpnn_pair_capped(graph, stats, mpnn, pair_cap(mpnn))
}

pub fn gmpnn_pair_capped(
    graph: &SampledGraph,
    stats: &GraphStats,
    mpnn: &Mpnn,
    cap: usize,
) -> Result<PairEmbeddings> {
    check_pair_input(graph, mpnn, cap)?;
    let n = graph.n;
    let norm = pair_norm(graph, stats)?;
    let adj = if mpnn.layers.iter().any(|l| matches!(l.phi, MessageFn::Neighbor)) {
        graph.dense_adjacency()
    } else {
        Array2::zeros((0, 0))
    };
    let mut f = vec![Array2::ones((n, n)); mpnn.in_width()];
    for layer in &mpnn.layers {
        let m = match layer.phi {
            MessageFn::Neighbor => f.iter().map(|fk| neighbor_message(fk, &adj, &norm)).collect(),
            MessageFn::Net(_) => net_messages(layer, graph, &norm, &f)?,
        };
        f = apply_update(layer, &f, &m)?;
    }
    Ok(PairEmbeddings { channels: f })
}

/// All-ones block-pair signal with `width` channels.
pub fn ones_pair_signal(r: usize, width: usize) -> Vec<Array2<f64>> {
    vec![Array2::ones((r, r)); width]
}

/// Continuous pairwise MPNN evaluated exactly on block pairs.
pub fn cmpnn_pair_sbm(
    spec: &SbmSpec,
    mpnn: &Mpnn,
    init: &[Array2<f64>],
) -> Result<BlockPairEmbeddings> {
    let report = validate_sbm(spec)?;
    let r = spec.r();
    if init.len() != mpnn.in_width() || init.iter().any(|c| c.dim() != (r, r)) {
        return Err(Error::Shape(format!(
            "block-pair signal must be {} channels of {r}x{r}",
            mpnn.in_width()
        )));
    }
    if !report.pair_ok {
        return Err(Error::Precondition(format!(
            "pairwise aggregation needs d_cmin > 0, got {}",
            report.d_cmin
        )));
    }
    let c_w = graphon_common_neighbors(spec);
    let mut f: Vec<Array2<f64>> = init.to_vec();
    for layer in &mpnn.layers {
        let fw = f.len();
        let mut g = vec![Array2::zeros((r, r)); layer.msg_width];
        for a in 0..r {
            for b in 0..r {
                let fab: Vec<f64> = f.iter().map(|c| c[[a, b]]).collect();
                let mut x = Array2::zeros((2 * r, fw));
                let mut y = Array2::zeros((2 * r, fw));
                for c in 0..r {
                    for k in 0..fw {
                        x[[c, k]] = fab[k];
                        x[[r + c, k]] = fab[k];
                        y[[c, k]] = f[k][[a, c]];
                        y[[r + c, k]] = f[k][[b, c]];
                    }
                }
                let msgs = layer.message(x.view(), y.view())?;
                for c in 0..r {
                    let w1 = 0.5 * spec.block_mass[c] * spec.s[[b, c]] / c_w[[a, b]];
                    let w2 = 0.5 * spec.block_mass[c] * spec.s[[a, c]] / c_w[[a, b]];
                    for (k, gk) in g.iter_mut().enumerate() {
                        gk[[a, b]] += w1 * msgs[[c, k]] + w2 * msgs[[r + c, k]];
                    }
                }
            }
        }
        f = apply_update(layer, &f, &g)?;
    }
    Ok(BlockPairEmbeddings { channels: f })
}

/// Entry `(i, j)` is the embedding of the block pair of `i` and `j`.
pub fn lift_block_pair(block: &BlockPairEmbeddings, graph: &SampledGraph) -> Result<PairEmbeddings> {
    let r = block.channels[0].nrows();
    if let Some(&b) = graph.block_of.iter().find(|&&b| b >= r) {
        return Err(Error::Shape(format!(
            "graph uses block {b} but only {r} blocks are embedded"
        )));
    }
    let bo = &graph.block_of;
    Ok(PairEmbeddings {
        channels: block
            .channels
            .iter()
            .map(|c| Array2::from_shape_fn((graph.n, graph.n), |(i, j)| c[[bo[i], bo[j]]]))
            .collect(),
    })
}

/// Upper-triangle CSV `i,j,f_1..f_F` (diagonal excluded).
pub fn pair_embeddings_csv(emb: &PairEmbeddings) -> String {
    let mut s = String::from("i,j");
    for k in 1..=emb.width() {
        write!(s, ",f_{k}").unwrap();
    }
    s.push('\n');
    let n = emb.n();
    for i in 0..n {
        for j in (i + 1)..n {
            write!(s, "{i},{j}").unwrap();
            for c in &emb.channels {
                write!(s, ",{:?}", c[[i, j]]).unwrap();
            }
            s.push('\n');
        }
    }
    s
}

struct PairLayerCache {
    inputs: Vec<Array2<f64>>,
    psi_rows: Vec<ForwardCache>,
}

/// Forward record of a pairwise MPNN with neighbor messages, for training.
pub struct PairTrace {
    layers: Vec<PairLayerCache>,
    adj: Array2<f64>,
    norm: Array2<f64>,
    pub output: PairEmbeddings,
}

pub fn pair_forward_trace(
    graph: &SampledGraph,
    stats: &GraphStats,
    mpnn: &Mpnn,
) -> Result<PairTrace> {
    check_pair_input(graph, mpnn, PAIR_CAP_GENERAL)?;
    if !mpnn.neighbor_messages() {
        return Err(Error::Precondition(
            "backpropagation through pair layers requires neighbor messages".into(),
        ));
    }
    let n = graph.n;
    let norm = pair_norm(graph, stats)?;
    let adj = graph.dense_adjacency();
    let mut f = vec![Array2::ones((n, n)); mpnn.in_width()];
    let mut layers = Vec::new();
    for layer in &mpnn.layers {
        let m: Vec<Array2<f64>> = f.iter().map(|fk| neighbor_message(fk, &adj, &norm)).collect();
        let (next, psi_rows) = match &layer.psi {
            UpdateFn::Net(net) => {
                let caches: Vec<Result<ForwardCache>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let z =
                            ndarray::concatenate![Axis(1), row_features(&f, i), row_features(&m, i)];
                        net.forward_batch(z.view())
                    })
                    .collect();
                let caches = caches.into_iter().collect::<Result<Vec<_>>>()?;
                let mut out = vec![Array2::zeros((n, n)); layer.out_width];
                for (i, c) in caches.iter().enumerate() {
                    for (k, ok) in out.iter_mut().enumerate() {
                        ok.row_mut(i).assign(&c.output().column(k));
                    }
                }
                (out, caches)
            }
            UpdateFn::Message => (m, Vec::new()),
            UpdateFn::Ratio => {
                return Err(Error::Precondition(
                    "ratio updates have no parameters to train".into(),
                ))
            }
        };
        layers.push(PairLayerCache {
            inputs: std::mem::replace(&mut f, next),
            psi_rows,
        });
    }
    Ok(PairTrace {
        layers,
        adj,
        norm,
        output: PairEmbeddings { channels: f },
    })
}

/// Gradients of `Σ_k ⟨grad_out[k], output[k]⟩` with respect to the MPNN
/// parameters, in [`Mpnn::params`] order.
pub fn pair_backward(mpnn: &Mpnn, trace: &PairTrace, grad_out: &[Array2<f64>]) -> Result<Vec<f64>> {
    if grad_out.len() != mpnn.out_width() {
        return Err(Error::Shape(format!(
            "{} gradient channels for output width {}",
            grad_out.len(),
            mpnn.out_width()
        )));
    }
    let mut per_layer: Vec<Vec<f64>> = vec![Vec::new(); mpnn.depth()];
    let mut g: Vec<Array2<f64>> = grad_out.to_vec();
    for (t, layer) in mpnn.layers.iter().enumerate().rev() {
        let cache = &trace.layers[t];
        let n = cache.inputs[0].nrows();
        let fw = layer.in_width;
        let (g_f, g_m) = match &layer.psi {
            UpdateFn::Net(net) => {
                let rows: Vec<Result<(Vec<f64>, Array2<f64>)>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let go = row_features(&g, i);
                        let (grads, gz) = net.backward_batch(&cache.psi_rows[i], go.view())?;
                        Ok((grads.flatten(), gz))
                    })
                    .collect();
                let mut pg = vec![0.0; net.num_params()];
                let mut gf = vec![Array2::zeros((n, n)); fw];
                let mut gm = vec![Array2::zeros((n, n)); layer.msg_width];
                for (i, row) in rows.into_iter().enumerate() {
                    let (p, gz) = row?;
                    for (a, b) in pg.iter_mut().zip(&p) {
                        *a += b;
                    }
                    for k in 0..fw {
                        gf[k].row_mut(i).assign(&gz.column(k));
                    }
                    for k in 0..layer.msg_width {
                        gm[k].row_mut(i).assign(&gz.column(fw + k));
                    }
                }
                per_layer[t] = pg;
                (gf, gm)
            }
            UpdateFn::Message => (vec![Array2::zeros((n, n)); fw], g.clone()),
            UpdateFn::Ratio => unreachable!("rejected by the forward trace"),
        };
        g = g_f
            .into_iter()
            .zip(&g_m)
            .map(|(mut gfk, gmk)| {
                let h = gmk * &trace.norm;
                let sym = &h + &h.t();
                gfk += &sym.dot(&trace.adj);
                gfk
            })
            .collect();
    }
    Ok(per_layer.concat())
}
