//! Link prediction on sampled graphs: scenario construction, models with a
//! trainable head, training, evaluation, and the scenario-by-method table.

mod dataset;
mod metrics;
mod model;
mod table;
mod train;

pub use dataset::{
    build_scenario, build_test, build_train, cross_iso_non_edges, split_sizes, LinkDataset,
    LinkSplit, Scenario, HIDDEN_FRACTION, TRAIN_FRACTION, VAL_FRACTION,
};
pub use metrics::{evaluate, hits_at_k, Confusion, EvalReport};
pub use model::{oracle_scores, Backbone, Embedding, HeadInput, LinkModel, DEFAULT_TAU};
pub use table::*;
pub use train::{bce_with_logits, loss_and_grad, train_link_model, EpochLog, TrainLog};
