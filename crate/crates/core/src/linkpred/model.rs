use ndarray::{s, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpnn::Mpnn;
use crate::nn::{sigmoid, Activation, FeedForwardNet, OutputActivation};
use crate::node_mpnn::gmpnn_node;
use crate::pair_mpnn::{gmpnn_pair, PairEmbeddings};
use crate::sbm::{degree_stats, graph_stats, GraphStats, SampledGraph, SbmSpec};

pub const DEFAULT_TAU: f64 = 0.5;

/// How two node embeddings are combined before the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadInput {
    /// `[f_i, f_j]`
    #[default]
    Concat,
    /// `f_i ⊙ f_j`
    InnerProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backbone {
    Node { mpnn: Mpnn, head_input: HeadInput },
    Pair { mpnn: Mpnn },
}

/// Embeddings produced by a backbone on one graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Embedding {
    Node(Array2<f64>),
    Pair(PairEmbeddings),
}

/// Backbone MPNN followed by a head net scoring node pairs.
///
/// The head emits logits; [`LinkModel::predict`] maps them through a sigmoid
/// and a pair is predicted as an edge when its probability exceeds `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub backbone: Backbone,
    pub trainable_backbone: bool,
    pub head: FeedForwardNet,
    pub tau: f64,
}

fn head_net(input: usize, hidden: &[usize], seed: u64) -> Result<FeedForwardNet> {
    let mut dims = vec![input];
    dims.extend_from_slice(hidden);
    dims.push(1);
    FeedForwardNet::init(&dims, Activation::Relu, OutputActivation::Identity, seed)
}

impl LinkModel {
    pub fn new(backbone: Backbone, trainable_backbone: bool, head: FeedForwardNet, tau: f64) -> Result<Self> {
        let want = match &backbone {
            Backbone::Node { mpnn, head_input: HeadInput::Concat } => 2 * mpnn.out_width(),
            Backbone::Node { mpnn, .. } | Backbone::Pair { mpnn } => mpnn.out_width(),
        };
        if head.input_dim() != want || head.output_dim() != 1 {
            return Err(Error::Shape(format!(
                "head maps {} -> {}, backbone needs {want} -> 1",
                head.input_dim(),
                head.output_dim()
            )));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Precondition(format!("threshold {tau} outside [0, 1]")));
        }
        Ok(LinkModel {
            backbone,
            trainable_backbone,
            head,
            tau,
        })
    }

    /// Node backbone with a fresh ReLU head of the given hidden widths.
    pub fn node(mpnn: Mpnn, head_input: HeadInput, hidden: &[usize], trainable: bool, seed: u64) -> Result<Self> {
        let input = match head_input {
            HeadInput::Concat => 2 * mpnn.out_width(),
            HeadInput::InnerProduct => mpnn.out_width(),
        };
        let head = head_net(input, hidden, seed)?;
        LinkModel::new(Backbone::Node { mpnn, head_input }, trainable, head, DEFAULT_TAU)
    }

    /// Pairwise backbone with a fresh ReLU head of the given hidden widths.
    pub fn pair(mpnn: Mpnn, hidden: &[usize], trainable: bool, seed: u64) -> Result<Self> {
        let head = head_net(mpnn.out_width(), hidden, seed)?;
        LinkModel::new(Backbone::Pair { mpnn }, trainable, head, DEFAULT_TAU)
    }

    pub fn mpnn(&self) -> &Mpnn {
        match &self.backbone {
            Backbone::Node { mpnn, .. } | Backbone::Pair { mpnn } => mpnn,
        }
    }

    fn mpnn_mut(&mut self) -> &mut Mpnn {
        match &mut self.backbone {
            Backbone::Node { mpnn, .. } | Backbone::Pair { mpnn } => mpnn,
        }
    }

    /// Graph statistics the backbone consumes.
    pub fn stats(&self, graph: &SampledGraph) -> GraphStats {
        match self.backbone {
            Backbone::Node { .. } => degree_stats(graph),
            Backbone::Pair { .. } => graph_stats(graph),
        }
    }

    pub fn embed(&self, graph: &SampledGraph, stats: &GraphStats) -> Result<Embedding> {
        match &self.backbone {
            Backbone::Node { mpnn, .. } => Ok(Embedding::Node(gmpnn_node(graph, stats, mpnn)?.values)),
            Backbone::Pair { mpnn } => Ok(Embedding::Pair(gmpnn_pair(graph, stats, mpnn)?)),
        }
    }

    /// Head inputs for `pairs`, one row each.
    pub fn head_features(&self, emb: &Embedding, pairs: &[(usize, usize)]) -> Result<Array2<f64>> {
        match (emb, &self.backbone) {
            (Embedding::Node(f), Backbone::Node { head_input, .. }) => {
                let w = f.ncols();
                let mut x = match head_input {
                    HeadInput::Concat => Array2::zeros((pairs.len(), 2 * w)),
                    HeadInput::InnerProduct => Array2::zeros((pairs.len(), w)),
                };
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    match head_input {
                        HeadInput::Concat => {
                            x.slice_mut(s![p, ..w]).assign(&f.row(i));
                            x.slice_mut(s![p, w..]).assign(&f.row(j));
                        }
                        HeadInput::InnerProduct => {
                            x.row_mut(p).assign(&(&f.row(i) * &f.row(j)));
                        }
                    }
                }
                Ok(x)
            }
            (Embedding::Pair(e), Backbone::Pair { .. }) => Ok(e.gather(pairs)),
            _ => Err(Error::Shape("embedding kind does not match the backbone".into())),
        }
    }

    /// Gradient of the head-input rows with respect to the embedding.
    pub(crate) fn scatter_head_grad(
        &self,
        emb: &Embedding,
        pairs: &[(usize, usize)],
        grad_x: &Array2<f64>,
    ) -> Result<Embedding> {
        match (emb, &self.backbone) {
            (Embedding::Node(f), Backbone::Node { head_input, .. }) => {
                let w = f.ncols();
                let mut g = Array2::zeros(f.dim());
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    let gx = grad_x.row(p);
                    match head_input {
                        HeadInput::Concat => {
                            g.row_mut(i).scaled_add(1.0, &gx.slice(s![..w]));
                            g.row_mut(j).scaled_add(1.0, &gx.slice(s![w..]));
                        }
                        HeadInput::InnerProduct => {
                            let gi = &gx * &f.row(j);
                            let gj = &gx * &f.row(i);
                            g.row_mut(i).scaled_add(1.0, &gi);
                            g.row_mut(j).scaled_add(1.0, &gj);
                        }
                    }
                }
                Ok(Embedding::Node(g))
            }
            (Embedding::Pair(e), Backbone::Pair { .. }) => {
                let n = e.n();
                let mut channels = vec![Array2::zeros((n, n)); e.width()];
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    for (k, c) in channels.iter_mut().enumerate() {
                        c[[i, j]] += grad_x[[p, k]];
                    }
                }
                Ok(Embedding::Pair(PairEmbeddings { channels }))
            }
            _ => Err(Error::Shape("embedding kind does not match the backbone".into())),
        }
    }

    pub fn logits_from(&self, emb: &Embedding, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        let x = self.head_features(emb, pairs)?;
        Ok(self.head.eval_batch(x.view())?.index_axis(Axis(1), 0).to_vec())
    }

    pub fn logits(&self, graph: &SampledGraph, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        let emb = self.embed(graph, &self.stats(graph))?;
        self.logits_from(&emb, pairs)
    }

    /// Edge probabilities for `pairs` on `graph`.
    pub fn predict(&self, graph: &SampledGraph, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        Ok(self.logits(graph, pairs)?.into_iter().map(sigmoid).collect())
    }

    /// Trainable parameters: backbone nets (when trainable) then the head.
    pub fn params(&self) -> Vec<f64> {
        let mut p = if self.trainable_backbone {
            self.mpnn().params()
        } else {
            Vec::new()
        };
        p.extend(self.head.params());
        p
    }

    pub fn num_params(&self) -> usize {
        self.head.num_params() + if self.trainable_backbone { self.mpnn().num_params() } else { 0 }
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} parameters supplied, model has {}",
                flat.len(),
                self.num_params()
            )));
        }
        let split = flat.len() - self.head.num_params();
        if self.trainable_backbone {
            self.mpnn_mut().set_params(&flat[..split])?;
        }
        self.head.set_params(&flat[split..])
    }
}

/// Scores of the predictor that knows the block of every node:
/// `S[block(i)][block(j)]`.
pub fn oracle_scores(spec: &SbmSpec, graph: &SampledGraph, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(i, j)| spec.s[[graph.block_of[i], graph.block_of[j]]])
        .collect()
}
