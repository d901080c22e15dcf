use ndarray::Array2;
use rand::Rng;

use super::spec::SbmSpec;
use crate::error::{Error, Result};
use crate::rng;

/// One draw `(G, F)` from an SBM.
///
/// Adjacency is kept as sorted neighbor lists; the graph is undirected and
/// has no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    pub n: usize,
    pub positions: Vec<f64>,
    pub block_of: Vec<usize>,
    pub neighbors: Vec<Vec<usize>>,
    pub node_features: Array2<f64>,
    pub seed: u64,
}

impl SampledGraph {
    /// Build from explicit edges. Positions are set to the midpoint of each
    /// node's block interval when a spec is not at hand, so callers that only
    /// need structure can pass `blocks = vec![0; n]`.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        block_of: Vec<usize>,
        node_features: Array2<f64>,
    ) -> Result<Self> {
        if block_of.len() != n || node_features.nrows() != n {
            return Err(Error::Shape(format!(
                "{n} nodes but {} block labels and {} feature rows",
                block_of.len(),
                node_features.nrows()
            )));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Shape(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                continue;
            }
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(SampledGraph {
            n,
            positions: vec![0.0; n],
            block_of,
            neighbors,
            node_features,
            seed: 0,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (i, list) in self.neighbors.iter().enumerate() {
            out.extend(list.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn dense_adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for (i, list) in self.neighbors.iter().enumerate() {
            for &j in list {
                a[[i, j]] = 1.0;
            }
        }
        a
    }

    /// Copy of the graph without the given edges.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> SampledGraph {
        let mut g = self.clone();
        for &(i, j) in removed {
            if let Ok(k) = g.neighbors[i].binary_search(&j) {
                g.neighbors[i].remove(k);
            }
            if let Ok(k) = g.neighbors[j].binary_search(&i) {
                g.neighbors[j].remove(k);
            }
        }
        g
    }

    /// Same graph with nodes relabelled: new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> SampledGraph {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let neighbors = perm
            .iter()
            .map(|&old| {
                let mut l: Vec<usize> = self.neighbors[old].iter().map(|&j| inv[j]).collect();
                l.sort_unstable();
                l
            })
            .collect();
        SampledGraph {
            n: self.n,
            positions: perm.iter().map(|&o| self.positions[o]).collect(),
            block_of: perm.iter().map(|&o| self.block_of[o]).collect(),
            neighbors,
            node_features: self.node_features.select(ndarray::Axis(0), perm),
            seed: self.seed,
        }
    }

    /// Replace node features by N-normalized degrees (a single column).
    pub fn with_degree_features(mut self) -> SampledGraph {
        let n = self.n as f64;
        self.node_features =
            Array2::from_shape_fn((self.n, 1), |(i, _)| self.neighbors[i].len() as f64 / n);
        self
    }
}

/// Sample `n` nodes: i.i.d. uniform positions, then one Bernoulli draw per
/// unordered pair.
pub fn sample_graph(spec: &SbmSpec, n: usize, seed: u64) -> Result<SampledGraph> {
    if n < 2 {
        return Err(Error::Precondition(format!("graph needs n >= 2 nodes, got {n}")));
    }
    let t = spec.boundaries();
    let mut pos_rng = rng::stream(seed, "positions");
    let positions: Vec<f64> = (0..n).map(|_| pos_rng.random::<f64>()).collect();
    let block_of: Vec<usize> = positions
        .iter()
        .map(|&x| t.iter().position(|&ta| x < ta).unwrap_or(spec.r() - 1))
        .collect();

    let mut edge_rng = rng::stream(seed, "edges");
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        let row = spec.s.row(block_of[i]);
        for j in (i + 1)..n {
            let u: f64 = edge_rng.random();
            if u < row[block_of[j]] {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    // lower neighbors were appended in increasing i, upper ones in increasing j,
    // so each list is already sorted

    let node_features = spec.b.select(ndarray::Axis(0), &block_of);
    Ok(SampledGraph {
        n,
        positions,
        block_of,
        neighbors,
        node_features,
        seed,
    })
}

/// Normalized degrees and, optionally, the common-neighbor matrix.
#[derive(Debug, Clone)]
pub struct GraphStats {
    pub degrees: Vec<f64>,
    pub common_neighbors: Option<Array2<f64>>,
}

impl GraphStats {
    /// Common-neighbor fraction, panicking if it was not computed.
    pub fn c_a(&self) -> &Array2<f64> {
        self.common_neighbors
            .as_ref()
            .expect("GraphStats built without common neighbors")
    }
}

pub fn degree_stats(graph: &SampledGraph) -> GraphStats {
    let n = graph.n as f64;
    GraphStats {
        degrees: graph.neighbors.iter().map(|l| l.len() as f64 / n).collect(),
        common_neighbors: None,
    }
}

/// Degrees plus `c_A(i,j) = (1/N)·#common neighbors`, with `1/N` when there
/// are none.
pub fn graph_stats(graph: &SampledGraph) -> GraphStats {
    let n = graph.n;
    let words = n.div_ceil(64);
    let mut bits = vec![0u64; n * words];
    for (i, list) in graph.neighbors.iter().enumerate() {
        let row = &mut bits[i * words..(i + 1) * words];
        for &j in list {
            row[j / 64] |= 1 << (j % 64);
        }
    }
    let inv_n = 1.0 / n as f64;
    let mut c = Array2::zeros((n, n));
    for i in 0..n {
        let bi = &bits[i * words..(i + 1) * words];
        for j in i..n {
            let bj = &bits[j * words..(j + 1) * words];
            let count: u32 = bi.iter().zip(bj).map(|(x, y)| (x & y).count_ones()).sum();
            let v = if count == 0 { inv_n } else { f64::from(count) * inv_n };
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    GraphStats {
        common_neighbors: Some(c),
        ..degree_stats(graph)
    }
}
