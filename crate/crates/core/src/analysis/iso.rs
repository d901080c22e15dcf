use rand::seq::index;
use serde::Serialize;

use super::slope::median;
use crate::error::{Error, Result};
use crate::node_mpnn::NodeEmbeddings;
use crate::rng;
use crate::sbm::SampledGraph;

/// Embedding gaps `max_k |f_ik − f_jk|` between nodes of isomorphic blocks
/// and between nodes of distinct non-isomorphic blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoGapStats {
    pub iso: Vec<f64>,
    pub non_iso: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSummary {
    pub count: usize,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

pub fn summarize(gaps: &[f64]) -> GapSummary {
    if gaps.is_empty() {
        return GapSummary {
            count: 0,
            q10: f64::NAN,
            median: f64::NAN,
            q90: f64::NAN,
            max: f64::NAN,
        };
    }
    let mut v = gaps.to_vec();
    let med = median(&mut v);
    GapSummary {
        count: v.len(),
        q10: quantile(&v, 0.1),
        median: med,
        q90: quantile(&v, 0.9),
        max: *v.last().unwrap(),
    }
}

impl IsoGapStats {
    pub fn iso_summary(&self) -> GapSummary {
        summarize(&self.iso)
    }

    pub fn non_iso_summary(&self) -> GapSummary {
        summarize(&self.non_iso)
    }
}

/// Node pairs drawn from the cross product of two block member lists.
struct PairPool<'a> {
    parts: Vec<(&'a [usize], &'a [usize])>,
    total: usize,
}

impl<'a> PairPool<'a> {
    fn new(members: &'a [Vec<usize>], block_pairs: &[(usize, usize)]) -> Self {
        let parts: Vec<_> = block_pairs
            .iter()
            .map(|&(a, b)| (members[a].as_slice(), members[b].as_slice()))
            .collect();
        let total = parts.iter().map(|(x, y)| x.len() * y.len()).sum();
        PairPool { parts, total }
    }

    fn get(&self, mut k: usize) -> (usize, usize) {
        for (x, y) in &self.parts {
            let size = x.len() * y.len();
            if k < size {
                return (x[k / y.len()], y[k % y.len()]);
            }
            k -= size;
        }
        unreachable!("index within pool")
    }

    /// All pairs if the budget covers them, else `budget` distinct pairs in
    /// increasing pool order.
    fn draw(&self, budget: usize, r: &mut rng::StreamRng) -> Vec<(usize, usize)> {
        if budget >= self.total {
            return (0..self.total).map(|k| self.get(k)).collect();
        }
        let mut idx = index::sample(r, self.total, budget).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|k| self.get(k)).collect()
    }
}

fn gap(emb: &NodeEmbeddings, i: usize, j: usize) -> f64 {
    emb.values
        .row(i)
        .iter()
        .zip(emb.values.row(j))
        .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Sample up to `budget` node pairs from each category and record their
/// embedding gaps.
pub fn iso_gap_stats(
    emb: &NodeEmbeddings,
    graph: &SampledGraph,
    iso_pairs: &[(usize, usize)],
    budget: usize,
    seed: u64,
) -> Result<IsoGapStats> {
    if iso_pairs.is_empty() {
        return Err(Error::Precondition("no isomorphic block pairs".into()));
    }
    if emb.values.nrows() != graph.n {
        return Err(Error::Shape(format!(
            "{} embedding rows for {} nodes",
            emb.values.nrows(),
            graph.n
        )));
    }
    let r = graph.block_of.iter().max().map_or(0, |&b| b + 1);
    let r = r.max(iso_pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap());
    let mut members = vec![Vec::new(); r];
    for (i, &b) in graph.block_of.iter().enumerate() {
        members[b].push(i);
    }
    let is_iso = |a: usize, b: usize| iso_pairs.contains(&(a.min(b), a.max(b)));
    let iso_blocks: Vec<(usize, usize)> = iso_pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut non_blocks = Vec::new();
    for a in 0..r {
        for b in (a + 1)..r {
            if !is_iso(a, b) {
                non_blocks.push((a, b));
            }
        }
    }
    if non_blocks.is_empty() {
        return Err(Error::Precondition("no non-isomorphic block pairs".into()));
    }
    let mut rr = rng::stream(seed, "iso-gaps");
    let iso = PairPool::new(&members, &iso_blocks)
        .draw(budget, &mut rr)
        .into_iter()
        .map(|(i, j)| gap(emb, i, j))
        .collect();
    let non_iso = PairPool::new(&members, &non_blocks)
        .draw(budget, &mut rr)
        .into_iter()
        .map(|(i, j)| gap(emb, i, j))
        .collect();
    Ok(IsoGapStats { iso, non_iso })
}
