use ndarray::{Array2, Axis};
use serde::Serialize;

use super::dataset::{LinkDataset, LinkSplit};
use super::model::{Backbone, Embedding, LinkModel};
use crate::error::{Error, Result};
use crate::nn::{sigmoid, AdamState};
use crate::node_mpnn::{node_backward, node_forward_trace, NodeTrace};
use crate::pair_mpnn::{pair_backward, pair_forward_trace, PairTrace};
use crate::sbm::{GraphStats, SampledGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainLog {
    /// One entry per parameter state evaluated, the last after the final step.
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

enum Forward {
    Fixed,
    Node(NodeTrace),
    Pair(PairTrace),
}

/// Graph-level state shared by every epoch.
struct Context<'a> {
    graph: &'a SampledGraph,
    stats: GraphStats,
    fixed: Option<Embedding>,
}

impl<'a> Context<'a> {
    fn new(model: &LinkModel, graph: &'a SampledGraph) -> Result<Self> {
        let stats = model.stats(graph);
        let fixed = if model.trainable_backbone {
            None
        } else {
            Some(model.embed(graph, &stats)?)
        };
        Ok(Context { graph, stats, fixed })
    }

    fn forward(&self, model: &LinkModel) -> Result<(Embedding, Forward)> {
        if let Some(e) = &self.fixed {
            return Ok((e.clone(), Forward::Fixed));
        }
        match &model.backbone {
            Backbone::Node { mpnn, .. } => {
                let t = node_forward_trace(self.graph, &self.stats, mpnn)?;
                Ok((Embedding::Node(t.output.clone()), Forward::Node(t)))
            }
            Backbone::Pair { mpnn } => {
                let t = pair_forward_trace(self.graph, &self.stats, mpnn)?;
                Ok((Embedding::Pair(t.output.clone()), Forward::Pair(t)))
            }
        }
    }
}

/// Mean binary cross-entropy of logits `z` against labels `y`.
pub fn bce_with_logits(z: &[f64], y: &[f64]) -> f64 {
    let total: f64 = z
        .iter()
        .zip(y)
        .map(|(&z, &y)| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p())
        .sum();
    total / z.len() as f64
}

fn accuracy(z: &[f64], y: &[f64], tau: f64) -> f64 {
    let right = z
        .iter()
        .zip(y)
        .filter(|(&z, &y)| (sigmoid(z) > tau) == (y > 0.5))
        .count();
    right as f64 / z.len() as f64
}

struct Step {
    loss: f64,
    grads: Vec<f64>,
    logits: Vec<f64>,
    emb: Embedding,
}

/// Loss on `split` and its gradient in [`LinkModel::params`] order.
fn loss_grad_in(ctx: &Context, model: &LinkModel, split: &LinkSplit) -> Result<Step> {
    let (pairs, y) = split.labelled();
    let (emb, fwd) = ctx.forward(model)?;
    let x = model.head_features(&emb, &pairs)?;
    let cache = model.head.forward_batch(x.view())?;
    let z = cache.output().index_axis(Axis(1), 0).to_vec();
    let loss = bce_with_logits(&z, &y);
    let b = pairs.len() as f64;
    let dz = Array2::from_shape_fn((pairs.len(), 1), |(p, _)| (sigmoid(z[p]) - y[p]) / b);
    let (head_grads, dx) = model.head.backward_batch(&cache, dz.view())?;
    let mut grads = match (fwd, model.scatter_head_grad(&emb, &pairs, &dx)?) {
        (Forward::Fixed, _) => Vec::new(),
        (Forward::Node(t), Embedding::Node(g)) => {
            node_backward(ctx.graph, model.mpnn(), &t, g.view())?
        }
        (Forward::Pair(t), Embedding::Pair(g)) => pair_backward(model.mpnn(), &t, &g.channels)?,
        _ => unreachable!("scatter preserves the embedding kind"),
    };
    grads.extend(head_grads.flatten());
    Ok(Step {
        loss,
        grads,
        logits: z,
        emb,
    })
}

/// Mean cross-entropy of `model` on `split` with its parameter gradient.
pub fn loss_and_grad(model: &LinkModel, graph: &SampledGraph, split: &LinkSplit) -> Result<(f64, Vec<f64>)> {
    let ctx = Context::new(model, graph)?;
    let step = loss_grad_in(&ctx, model, split)?;
    Ok((step.loss, step.grads))
}

/// Full-batch Adam on the training split of `data.observed`.
///
/// Validation accuracy is recorded for every parameter state visited; the
/// returned model is the earliest state with the best validation accuracy.
pub fn train_link_model(
    model: &LinkModel,
    data: &LinkDataset,
    epochs: usize,
    lr: f64,
) -> Result<(LinkModel, TrainLog)> {
    if data.train.is_empty() || data.val.is_empty() {
        return Err(Error::Precondition("training needs train and validation pairs".into()));
    }
    let ctx = Context::new(model, &data.observed)?;
    let (val_pairs, val_y) = data.val.labelled();
    let (_, train_y) = data.train.labelled();
    let mut current = model.clone();
    let mut params = current.params();
    let mut adam = AdamState::new(params.len(), lr);
    let mut log = Vec::with_capacity(epochs + 1);
    let mut best: Option<(LinkModel, usize, f64)> = None;
    for epoch in 0..=epochs {
        let last = epoch == epochs;
        // one forward pass serves the train loss and the validation score
        let step = loss_grad_in(&ctx, &current, &data.train)?;
        if !step.loss.is_finite() {
            return Err(Error::Numerical(format!(
                "training loss diverged at epoch {epoch}: {}",
                step.loss
            )));
        }
        let val_acc = accuracy(&current.logits_from(&step.emb, &val_pairs)?, &val_y, current.tau);
        log.push(EpochLog {
            epoch,
            loss: step.loss,
            train_accuracy: accuracy(&step.logits, &train_y, current.tau),
            val_accuracy: val_acc,
        });
        if best.as_ref().is_none_or(|b| val_acc > b.2) {
            best = Some((current.clone(), epoch, val_acc));
        }
        if last {
            break;
        }
        adam.update(&mut params, &step.grads)?;
        current.set_params(&params)?;
    }
    let (model, best_epoch, best_val_accuracy) = best.expect("at least one evaluation");
    Ok((
        model,
        TrainLog {
            epochs: log,
            best_epoch,
            best_val_accuracy,
        },
    ))
}
