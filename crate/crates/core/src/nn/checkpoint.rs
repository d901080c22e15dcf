use std::fmt::Write as _;

use super::net::{Activation, FeedForwardNet, OutputActivation};
use crate::error::{Error, Result};

/// Text checkpoint: header `dims ...`, an activation line, then one
/// parameter per line in [`FeedForwardNet::params`] order.
pub fn to_checkpoint(net: &FeedForwardNet) -> String {
    let mut s = String::from("dims");
    for d in &net.dims {
        write!(s, " {d}").unwrap();
    }
    s.push('\n');
    writeln!(
        s,
        "activation {} {}",
        serde_json::to_string(&net.activation).unwrap().trim_matches('"'),
        serde_json::to_string(&net.output_activation).unwrap().trim_matches('"')
    )
    .unwrap();
    for p in net.params() {
        writeln!(s, "{p:?}").unwrap();
    }
    s
}

pub fn from_checkpoint(text: &str) -> Result<FeedForwardNet> {
    let bad = |m: &str| Error::Config(format!("bad checkpoint: {m}"));
    let mut lines = text.lines();
    let dims: Vec<usize> = lines
        .next()
        .and_then(|l| l.strip_prefix("dims"))
        .ok_or_else(|| bad("missing dims header"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("dims must be integers")))
        .collect::<Result<_>>()?;
    let acts: Vec<&str> = lines
        .next()
        .and_then(|l| l.strip_prefix("activation"))
        .ok_or_else(|| bad("missing activation line"))?
        .split_whitespace()
        .collect();
    if acts.len() != 2 {
        return Err(bad("activation line needs two names"));
    }
    let activation: Activation = serde_json::from_str(&format!("\"{}\"", acts[0]))
        .map_err(|_| bad("unknown activation"))?;
    let output: OutputActivation = serde_json::from_str(&format!("\"{}\"", acts[1]))
        .map_err(|_| bad("unknown output activation"))?;
    let params: Vec<f64> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().map_err(|_| bad("parameter is not a number")))
        .collect::<Result<_>>()?;
    let mut net = FeedForwardNet::zeros(&dims, activation, output)?;
    net.set_params(&params)?;
    Ok(net)
}
