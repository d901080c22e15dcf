//! Brute-force message passing written directly from the layer definitions,
//! one node or pair at a time, plus random instance generators.

#![allow(dead_code)]

use graphon_linkpred::mpnn::{Aggregation, MessageFn, Mpnn, MpnnLayer, UpdateFn};
use graphon_linkpred::nn::{Activation, FeedForwardNet, OutputActivation};
use graphon_linkpred::rng;
use graphon_linkpred::sbm::{SampledGraph, SbmSpec};
use ndarray::Array2;
use rand::Rng;

fn phi(layer: &MpnnLayer, x: &[f64], y: &[f64]) -> Vec<f64> {
    match &layer.phi {
        MessageFn::Neighbor => y.to_vec(),
        MessageFn::Net(net) => {
            let z: Vec<f64> = x.iter().chain(y).copied().collect();
            net.forward(&z).unwrap()
        }
    }
}

fn psi(layer: &MpnnLayer, x: &[f64], m: &[f64]) -> Vec<f64> {
    match &layer.psi {
        UpdateFn::Message => m.to_vec(),
        UpdateFn::Ratio => x.iter().zip(m).map(|(a, b)| a / b.max(1e-12)).collect(),
        UpdateFn::Net(net) => {
            let z: Vec<f64> = x.iter().chain(m).copied().collect();
            net.forward(&z).unwrap()
        }
    }
}

fn adjacency(g: &SampledGraph) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; g.n]; g.n];
    for (i, row) in a.iter_mut().enumerate() {
        for &j in &g.neighbors[i] {
            row[j] = 1.0;
        }
    }
    a
}

/// Node embeddings by explicit sums over all `j`.
pub fn node_oracle(g: &SampledGraph, mpnn: &Mpnn) -> Vec<Vec<f64>> {
    let n = g.n;
    let a = adjacency(g);
    let mut f: Vec<Vec<f64>> = (0..n).map(|i| g.node_features.row(i).to_vec()).collect();
    for layer in &mpnn.layers {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let deg: f64 = a[i].iter().sum();
            let scale = match mpnn.aggregation {
                Aggregation::NeighborAverage if deg == 0.0 => 0.0,
                Aggregation::NeighborAverage => 1.0 / deg,
                Aggregation::NormalizedSum => 1.0 / n as f64,
            };
            let mut m = vec![0.0; layer.msg_width];
            for j in 0..n {
                if a[i][j] == 0.0 {
                    continue;
                }
                for (mk, v) in m.iter_mut().zip(phi(layer, &f[i], &f[j])) {
                    *mk += a[i][j] * v;
                }
            }
            let m: Vec<f64> = m.iter().map(|v| v * scale).collect();
            next.push(psi(layer, &f[i], &m));
        }
        f = next;
    }
    f
}

/// Pairwise embeddings `out[i][j]` from all-ones features by explicit sums over `z`.
pub fn pair_oracle(g: &SampledGraph, mpnn: &Mpnn) -> Vec<Vec<Vec<f64>>> {
    let n = g.n;
    let nf = n as f64;
    let a = adjacency(g);
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|z| a[i][z] * a[j][z]).sum::<f64>() / nf;
            c[i][j] = if s == 0.0 { 1.0 / nf } else { s };
        }
    }
    let mut f = vec![vec![vec![1.0; mpnn.in_width()]; n]; n];
    for layer in &mpnn.layers {
        let mut next = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut m = vec![0.0; layer.msg_width];
                for z in 0..n {
                    let left = phi(layer, &f[i][j], &f[i][z]);
                    let right = phi(layer, &f[i][j], &f[j][z]);
                    for k in 0..layer.msg_width {
                        m[k] += (a[j][z] * left[k] + a[i][z] * right[k]) / (2.0 * nf * c[i][j]);
                    }
                }
                next[i][j] = psi(layer, &f[i][j], &m);
            }
        }
        f = next;
    }
    f
}

pub fn random_graph(seed: u64, n: usize, width: usize) -> SampledGraph {
    let mut r = rng::stream(seed, "oracle-graph");
    let p: f64 = r.random_range(0.1..0.9);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let feats = Array2::from_shape_fn((n, width), |_| r.random_range(-1.0..1.0));
    SampledGraph::from_edges(n, &edges, vec![0; n], feats).unwrap()
}

fn net(dims: &[usize], act: Activation, seed: u64) -> FeedForwardNet {
    FeedForwardNet::init(dims, act, OutputActivation::Identity, seed).unwrap()
}

/// A random network of depth 1 or 2 mixing every message/update kind that
/// fits the widths.
pub fn random_mpnn(seed: u64, in_width: usize, aggregation: Aggregation) -> Mpnn {
    let mut r = rng::stream(seed, "oracle-mpnn");
    let depth = r.random_range(1..=2);
    let mut fns = Vec::new();
    let mut w = in_width;
    for t in 0..depth {
        let s = rng::derive_seed(seed, &format!("layer{t}"));
        let act = if r.random::<bool>() { Activation::Relu } else { Activation::Tanh };
        let (phi, h) = if r.random::<bool>() {
            (MessageFn::Neighbor, w)
        } else {
            let h = r.random_range(1..=3);
            (MessageFn::Net(net(&[2 * w, 3, h], act, s)), h)
        };
        let out = r.random_range(1..=3);
        let psi = match r.random_range(0..3) {
            0 => UpdateFn::Message,
            1 if h == w => UpdateFn::Ratio,
            _ => UpdateFn::Net(net(&[w + h, 4, out], act, s ^ 1)),
        };
        w = match &psi {
            UpdateFn::Message => h,
            UpdateFn::Ratio => w,
            UpdateFn::Net(_) => out,
        };
        fns.push((phi, psi));
    }
    Mpnn::new(in_width, fns, aggregation).unwrap()
}

/// Random valid SBM with `r` blocks and scalar signal.
pub fn random_spec(seed: u64, r: usize) -> SbmSpec {
    let mut g = rng::stream(seed, "oracle-spec");
    let raw: Vec<f64> = (0..r).map(|_| g.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut mass: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let head: f64 = mass[..r - 1].iter().sum();
    mass[r - 1] = 1.0 - head;
    let mut s = vec![0.0; r * r];
    for a in 0..r {
        for b in a..r {
            let v = g.random_range(0.05..1.0);
            s[a * r + b] = v;
            s[b * r + a] = v;
        }
    }
    let b = (0..r).map(|_| g.random_range(0.5..2.0)).collect();
    SbmSpec::from_rows(mass, s, b).unwrap()
}

/// Absolute error below magnitude 1, relative above. Ratio updates divide
/// by the `1e-12` guard on empty neighborhoods, so values up to ~1e24 occur.
pub fn scaled_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

pub fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).fold(0.0, |m, (x, y)| m.max(scaled_err(*x, *y)))
}

/// Worst brute-force mismatch over one random instance, for every discrete pass.
pub fn oracle_instance_error(seed: u64) -> f64 {
    let mut r = rng::stream(seed, "oracle-instance");
    let n = r.random_range(2..=6);
    let width = r.random_range(1..=2);
    let g = random_graph(seed, n, width);
    let mut worst: f64 = 0.0;
    for agg in [Aggregation::NeighborAverage, Aggregation::NormalizedSum] {
        let mpnn = random_mpnn(seed, width, agg);
        let got = graphon_linkpred::node_mpnn::gmpnn_node(&g, &graphon_linkpred::sbm::degree_stats(&g), &mpnn).unwrap();
        let want = node_oracle(&g, &mpnn);
        assert_eq!(got.values.dim(), (n, want[0].len()));
        let flat: Vec<f64> = want.concat();
        worst = worst.max(max_abs_diff(got.values.iter(), flat.iter()));
    }
    let stats = graphon_linkpred::sbm::graph_stats(&g);
    let pair_nets = [
        graphon_linkpred::mpnn::fixed_psi_mpnn(r.random_range(1..=2)).unwrap(),
        random_mpnn(seed ^ 0x5a5a, 1, Aggregation::NeighborAverage),
    ];
    for mpnn in &pair_nets {
        let got = graphon_linkpred::pair_mpnn::gmpnn_pair(&g, &stats, mpnn).unwrap();
        let want = pair_oracle(&g, mpnn);
        for (k, ch) in got.channels.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max(scaled_err(ch[[i, j]], want[i][j][k]));
                }
            }
        }
    }
    worst
}
