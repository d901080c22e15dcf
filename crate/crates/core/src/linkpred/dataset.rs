use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, derive_seed};
use crate::sbm::{isomorphic_block_pairs, sample_graph, SampledGraph, SbmSpec, DEFAULT_ISO_TOL};

pub const HIDDEN_FRACTION: f64 = 0.1;
pub const TRAIN_FRACTION: f64 = 0.8;
pub const VAL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Transductive,
    InductiveSame,
    InductiveOod,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::Transductive,
        Scenario::InductiveSame,
        Scenario::InductiveOod,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Transductive => "transductive",
            Scenario::InductiveSame => "inductive_same",
            Scenario::InductiveOod => "inductive_ood",
        }
    }
}

/// Positive (hidden edge) and negative (non-edge) pairs, each `(i, j)` with `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkSplit {
    pub pos: Vec<(usize, usize)>,
    pub neg: Vec<(usize, usize)>,
}

impl LinkSplit {
    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Positives then negatives, with labels 1 and 0.
    pub fn labelled(&self) -> (Vec<(usize, usize)>, Vec<f64>) {
        let pairs = self.pos.iter().chain(&self.neg).copied().collect();
        let mut y = vec![1.0; self.pos.len()];
        y.resize(self.len(), 0.0);
        (pairs, y)
    }
}

/// One graph with hidden edges and the labelled pairs drawn from it.
///
/// `full` is the sampled graph, `observed` the same graph with every hidden
/// edge removed and node features reset to normalized observed degrees.
/// Test-only datasets leave `train` and `val` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDataset {
    pub scenario: Scenario,
    pub full: SampledGraph,
    pub observed: SampledGraph,
    pub train: LinkSplit,
    pub val: LinkSplit,
    pub test: LinkSplit,
}

/// Sizes of the train, val and test positive splits for `edges` edges:
/// `h = ⌊0.1 E⌋` hidden, `⌊0.8 h⌋` train, `⌊0.1 h⌋` val, the rest test.
pub fn split_sizes(edges: usize) -> (usize, usize, usize) {
    let hidden = (HIDDEN_FRACTION * edges as f64).floor() as usize;
    let train = (TRAIN_FRACTION * hidden as f64).floor() as usize;
    let val = (VAL_FRACTION * hidden as f64).floor() as usize;
    (train, val, hidden - train - val)
}

/// Every non-edge `(i, j)`, `i < j`, whose endpoints sit in two distinct
/// isomorphic blocks.
pub fn cross_iso_non_edges(spec: &SbmSpec, graph: &SampledGraph) -> Result<Vec<(usize, usize)>> {
    let iso = isomorphic_block_pairs(spec, DEFAULT_ISO_TOL);
    if iso.is_empty() {
        return Err(Error::Precondition(
            "negative sampling needs at least one pair of isomorphic blocks".into(),
        ));
    }
    let mut members = vec![Vec::new(); spec.r()];
    for (i, &b) in graph.block_of.iter().enumerate() {
        members[b].push(i);
    }
    let mut out = Vec::new();
    for &(a, b) in &iso {
        for &i in &members[a] {
            for &j in &members[b] {
                if !graph.has_edge(i, j) {
                    out.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Draw `count` distinct negatives in random order.
fn sample_negatives(
    spec: &SbmSpec,
    graph: &SampledGraph,
    count: usize,
    r: &mut rng::StreamRng,
) -> Result<Vec<(usize, usize)>> {
    let pool = cross_iso_non_edges(spec, graph)?;
    if pool.len() < count {
        return Err(Error::Precondition(format!(
            "{count} negatives requested but only {} cross-block non-edges exist",
            pool.len()
        )));
    }
    Ok(index::sample(r, pool.len(), count)
        .into_iter()
        .map(|k| pool[k])
        .collect())
}

/// Sample a graph and hide a random tenth of its edges, returned in random order.
fn hide_edges(
    spec: &SbmSpec,
    n: usize,
    seed: u64,
) -> Result<(SampledGraph, Vec<(usize, usize)>, rng::StreamRng)> {
    let full = sample_graph(spec, n, derive_seed(seed, "graph"))?;
    let edges = full.edges();
    let (a, b, c) = split_sizes(edges.len());
    let mut r = rng::stream(seed, "splits");
    let mut idx = index::sample(&mut r, edges.len(), a + b + c).into_vec();
    idx.sort_unstable();
    idx.shuffle(&mut r);
    let hidden = idx.into_iter().map(|k| edges[k]).collect();
    Ok((full, hidden, r))
}

fn observe(full: &SampledGraph, hidden: &[(usize, usize)]) -> SampledGraph {
    full.without_edges(hidden).with_degree_features()
}

/// Training graph of `n` nodes with all three splits.
pub fn build_train(spec: &SbmSpec, n: usize, seed: u64) -> Result<LinkDataset> {
    let (full, hidden, mut r) = hide_edges(spec, n, seed)?;
    let (a, b, _) = split_sizes(full.num_edges());
    if hidden.len() < 3 {
        return Err(Error::Precondition(format!(
            "graph with {} edges is too small to split",
            full.num_edges()
        )));
    }
    let neg = sample_negatives(spec, &full, hidden.len(), &mut r)?;
    let split = |lo: usize, hi: usize| LinkSplit {
        pos: hidden[lo..hi].to_vec(),
        neg: neg[lo..hi].to_vec(),
    };
    Ok(LinkDataset {
        scenario: Scenario::Transductive,
        observed: observe(&full, &hidden),
        train: split(0, a),
        val: split(a, a + b),
        test: split(a + b, hidden.len()),
        full,
    })
}

/// Test dataset for `scenario`. Transductive reuses the training graph and
/// its reserved test split; the inductive scenarios sample a fresh graph
/// (`n_tr` or `n_te` nodes), hide a tenth of its edges, and keep as many
/// test positives as the transductive split has.
pub fn build_test(
    spec: &SbmSpec,
    train: &LinkDataset,
    n_te: usize,
    seed: u64,
    scenario: Scenario,
) -> Result<LinkDataset> {
    let n = match scenario {
        Scenario::Transductive => {
            return Ok(LinkDataset {
                scenario,
                full: train.full.clone(),
                observed: train.observed.clone(),
                train: LinkSplit::default(),
                val: LinkSplit::default(),
                test: train.test.clone(),
            })
        }
        Scenario::InductiveSame => train.full.n,
        Scenario::InductiveOod => n_te,
    };
    let want = train.test.pos.len();
    let (full, hidden, mut r) = hide_edges(spec, n, derive_seed(seed, scenario.name()))?;
    if hidden.len() < want {
        return Err(Error::Precondition(format!(
            "test graph hides {} edges, {want} positives needed",
            hidden.len()
        )));
    }
    let neg = sample_negatives(spec, &full, want, &mut r)?;
    Ok(LinkDataset {
        scenario,
        observed: observe(&full, &hidden),
        train: LinkSplit::default(),
        val: LinkSplit::default(),
        test: LinkSplit {
            pos: hidden[..want].to_vec(),
            neg,
        },
        full,
    })
}

/// Training dataset on `n_tr` nodes and the test dataset for `scenario`.
pub fn build_scenario(
    spec: &SbmSpec,
    n_tr: usize,
    n_te: usize,
    seed: u64,
    scenario: Scenario,
) -> Result<(LinkDataset, LinkDataset)> {
    let train = build_train(spec, n_tr, derive_seed(seed, "train"))?;
    let test = build_test(spec, &train, n_te, derive_seed(seed, "test"), scenario)?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn spec() -> SbmSpec {
        SbmSpec::reference_link_prediction()
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(split_sizes(0), (0, 0, 0));
        assert_eq!(split_sizes(1234), (98, 12, 13));
        assert_eq!(split_sizes(99), (7, 0, 2));
    }

    #[test]
    fn counts_and_integrity() {
        let ds = build_train(&spec(), 300, 7).unwrap();
        let e = ds.full.num_edges();
        let hidden = (0.1 * e as f64).floor();
        assert!((ds.train.pos.len() as f64 - 0.8 * hidden).abs() <= 1.0);
        let (a, b, c) = split_sizes(e);
        assert_eq!(
            (ds.train.pos.len(), ds.val.pos.len(), ds.test.pos.len()),
            (a, b, c)
        );
        for s in [&ds.train, &ds.val, &ds.test] {
            assert_eq!(s.pos.len(), s.neg.len());
        }
        let all: Vec<_> = [&ds.train, &ds.val, &ds.test]
            .iter()
            .flat_map(|s| s.pos.iter().copied())
            .collect();
        let set: HashSet<_> = all.iter().copied().collect();
        assert_eq!(set.len(), all.len());
        assert_eq!(ds.observed.num_edges(), e - all.len());
        for &(i, j) in &all {
            assert!(ds.full.has_edge(i, j) && !ds.observed.has_edge(i, j));
        }
        let negs: HashSet<_> = [&ds.train, &ds.val, &ds.test]
            .iter()
            .flat_map(|s| s.neg.iter().copied())
            .collect();
        assert_eq!(negs.len(), all.len());
        for &(i, j) in &negs {
            assert!(i < j && !ds.full.has_edge(i, j));
            let (a, b) = (ds.full.block_of[i], ds.full.block_of[j]);
            assert!(a != b && a + b == 2, "blocks {a} {b}");
        }
    }

    #[test]
    fn observed_degrees() {
        let ds = build_train(&spec(), 120, 1).unwrap();
        for i in 0..ds.observed.n {
            let d = ds.observed.neighbors[i].len() as f64 / 120.0;
            assert_eq!(ds.observed.node_features[[i, 0]], d);
        }
    }

    #[test]
    fn transductive_shares_graph() {
        let (tr, te) = build_scenario(&spec(), 200, 800, 3, Scenario::Transductive).unwrap();
        assert_eq!(tr.observed, te.observed);
        assert_eq!(tr.test, te.test);
    }

    #[test]
    fn inductive_sizes() {
        let (tr, same) = build_scenario(&spec(), 200, 800, 3, Scenario::InductiveSame).unwrap();
        let (_, ood) = build_scenario(&spec(), 200, 800, 3, Scenario::InductiveOod).unwrap();
        assert_eq!(same.full.n, 200);
        assert_eq!(ood.full.n, 800);
        assert_ne!(same.full, tr.full);
        for d in [&same, &ood] {
            assert_eq!(d.test.pos.len(), tr.test.pos.len());
            assert_eq!(d.test.neg.len(), tr.test.pos.len());
            assert!(d.train.is_empty() && d.val.is_empty());
            for &(i, j) in &d.test.pos {
                assert!(d.full.has_edge(i, j) && !d.observed.has_edge(i, j));
            }
        }
        let (a, b, c) = split_sizes(ood.full.num_edges());
        assert_eq!(ood.full.num_edges() - ood.observed.num_edges(), a + b + c);
    }

    #[test]
    fn deterministic() {
        let a = build_scenario(&spec(), 150, 300, 9, Scenario::InductiveOod).unwrap();
        let b = build_scenario(&spec(), 150, 300, 9, Scenario::InductiveOod).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_iso_blocks() {
        let s = SbmSpec::from_rows(vec![0.3, 0.7], vec![0.5, 0.1, 0.1, 0.5], vec![1.0, 1.0]).unwrap();
        assert!(matches!(build_train(&s, 100, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn too_few_negatives() {
        // dense cross-block edges leave almost no across-block non-edges
        let s = SbmSpec::from_rows(vec![0.5, 0.5], vec![0.1, 1.0, 1.0, 0.1], vec![1.0, 1.0]).unwrap();
        assert!(matches!(build_train(&s, 60, 0), Err(Error::Precondition(_))));
    }
}
