//! Small dense networks with exact backpropagation and Adam.

mod adam;
mod checkpoint;
mod net;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{from_checkpoint, to_checkpoint};
pub use net::{
    gradient_check, inf_operator_norm, sigmoid, Activation, FeedForwardNet, ForwardCache,
    NetGrads, OutputActivation,
};
