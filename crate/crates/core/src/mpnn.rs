//! Message-passing network definitions shared by the node and pairwise
//! passes.
//!
//! A layer is a message function Φ and an update function Ψ. Each is either
//! a [`FeedForwardNet`] or one of the closed forms `Φ(x, y) = y`,
//! `Ψ(x, m) = m`, `Ψ(x, m) = x / m`.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, FeedForwardNet, OutputActivation};
use crate::rng;

/// Floor applied to the denominator of the ratio update.
pub const EPS_DIV: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MessageFn {
    /// `Φ(x, y) = y`.
    Neighbor,
    Net(FeedForwardNet),
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpdateFn {
    /// `Ψ(x, m) = m`.
    Message,
    /// `Ψ(x, m) = x / max(m, EPS_DIV)`, elementwise.
    Ratio,
    Net(FeedForwardNet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    NeighborAverage,
    NormalizedSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpnnLayer {
    pub phi: MessageFn,
    pub psi: UpdateFn,
    pub in_width: usize,
    pub msg_width: usize,
    pub out_width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mpnn {
    pub layers: Vec<MpnnLayer>,
    pub aggregation: Aggregation,
}

pub fn ratio_psi(x: f64, m: f64) -> f64 {
    x / m.max(EPS_DIV)
}

impl MpnnLayer {
    pub fn new(in_width: usize, phi: MessageFn, psi: UpdateFn) -> Result<Self> {
        let msg_width = match &phi {
            MessageFn::Neighbor => in_width,
            MessageFn::Net(net) => {
                if net.input_dim() != 2 * in_width {
                    return Err(Error::Shape(format!(
                        "message net takes {} inputs, expected 2 x {in_width}",
                        net.input_dim()
                    )));
                }
                net.output_dim()
            }
        };
        let out_width = match &psi {
            UpdateFn::Message => msg_width,
            UpdateFn::Ratio => {
                if msg_width != in_width {
                    return Err(Error::Shape(format!(
                        "ratio update needs message width {msg_width} = feature width {in_width}"
                    )));
                }
                in_width
            }
            UpdateFn::Net(net) => {
                if net.input_dim() != in_width + msg_width {
                    return Err(Error::Shape(format!(
                        "update net takes {} inputs, expected {in_width} + {msg_width}",
                        net.input_dim()
                    )));
                }
                net.output_dim()
            }
        };
        Ok(MpnnLayer {
            phi,
            psi,
            in_width,
            msg_width,
            out_width,
        })
    }

    /// Φ applied row-wise to paired rows of `x` and `y`.
    pub fn message(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Array2<f64>> {
        match &self.phi {
            MessageFn::Neighbor => Ok(y.to_owned()),
            MessageFn::Net(net) => net.eval_batch(concatenate![Axis(1), x, y].view()),
        }
    }

    /// Ψ applied row-wise to features `x` and aggregated messages `m`.
    pub fn update(&self, x: ArrayView2<f64>, m: ArrayView2<f64>) -> Result<Array2<f64>> {
        match &self.psi {
            UpdateFn::Message => Ok(m.to_owned()),
            UpdateFn::Ratio => {
                let mut out = x.to_owned();
                out.zip_mut_with(&m, |a, &b| *a = ratio_psi(*a, b));
                Ok(out)
            }
            UpdateFn::Net(net) => net.eval_batch(concatenate![Axis(1), x, m].view()),
        }
    }

    pub fn has_nets(&self) -> bool {
        matches!(self.phi, MessageFn::Net(_)) || matches!(self.psi, UpdateFn::Net(_))
    }
}

impl Mpnn {
    /// Chain `(Φ, Ψ)` pairs starting from features of width `in_width`.
    pub fn new(
        in_width: usize,
        fns: Vec<(MessageFn, UpdateFn)>,
        aggregation: Aggregation,
    ) -> Result<Self> {
        if fns.is_empty() {
            return Err(Error::Precondition("an MPNN needs at least one layer".into()));
        }
        let mut width = in_width;
        let mut layers = Vec::with_capacity(fns.len());
        for (t, (phi, psi)) in fns.into_iter().enumerate() {
            let layer = MpnnLayer::new(width, phi, psi)
                .map_err(|e| Error::Shape(format!("layer {}: {e}", t + 1)))?;
            width = layer.out_width;
            layers.push(layer);
        }
        Ok(Mpnn {
            layers,
            aggregation,
        })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn in_width(&self) -> usize {
        self.layers[0].in_width
    }

    pub fn out_width(&self) -> usize {
        self.layers.last().unwrap().out_width
    }

    /// True when no layer contains a net.
    pub fn is_symbolic(&self) -> bool {
        self.layers.iter().all(|l| !l.has_nets())
    }

    /// True when every Φ is the neighbor projection.
    pub fn neighbor_messages(&self) -> bool {
        self.layers
            .iter()
            .all(|l| matches!(l.phi, MessageFn::Neighbor))
    }

    /// `Φ(x, y) = y`, `Ψ(x, m) = m` for every layer: plain neighborhood
    /// averaging (or summing).
    pub fn averaging(t: usize, width: usize, aggregation: Aggregation) -> Result<Self> {
        Mpnn::new(
            width,
            vec![(MessageFn::Neighbor, UpdateFn::Message); t],
            aggregation,
        )
    }

    /// GraphSAGE-style network: `Φ(x, y) = y` and a ReLU net
    /// `Ψ: [2 F_{t-1}] → hidden → F_t` per layer. `widths = [F_0, ..., F_T]`.
    pub fn graphsage(
        widths: &[usize],
        hidden: usize,
        aggregation: Aggregation,
        seed: u64,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Precondition("graphsage needs at least one layer".into()));
        }
        let fns = widths
            .windows(2)
            .enumerate()
            .map(|(t, w)| {
                let net = FeedForwardNet::init(
                    &[2 * w[0], hidden, w[1]],
                    Activation::Relu,
                    OutputActivation::Identity,
                    rng::derive_seed(seed, &format!("psi{t}")),
                )?;
                Ok((MessageFn::Neighbor, UpdateFn::Net(net)))
            })
            .collect::<Result<Vec<_>>>()?;
        Mpnn::new(widths[0], fns, aggregation)
    }

    /// Pairwise network with `Φ(x, y) = y` and an update net
    /// `Ψ: [F_{t-1} + F_{t-1}] → hidden → F_t` per layer.
    pub fn pair_learned(widths: &[usize], hidden: usize, seed: u64) -> Result<Self> {
        Mpnn::graphsage(widths, hidden, Aggregation::NeighborAverage, seed)
    }

    /// Trainable nets in layer order (Φ before Ψ within a layer).
    pub fn nets(&self) -> Vec<&FeedForwardNet> {
        let mut out = Vec::new();
        for l in &self.layers {
            if let MessageFn::Net(n) = &l.phi {
                out.push(n);
            }
            if let UpdateFn::Net(n) = &l.psi {
                out.push(n);
            }
        }
        out
    }

    pub fn nets_mut(&mut self) -> Vec<&mut FeedForwardNet> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            if let MessageFn::Net(n) = &mut l.phi {
                out.push(n);
            }
            if let UpdateFn::Net(n) = &mut l.psi {
                out.push(n);
            }
        }
        out
    }

    pub fn params(&self) -> Vec<f64> {
        self.nets().iter().flat_map(|n| n.params()).collect()
    }

    pub fn num_params(&self) -> usize {
        self.nets().iter().map(|n| n.num_params()).sum()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} parameters supplied, mpnn has {}",
                flat.len(),
                self.num_params()
            )));
        }
        let mut k = 0;
        for net in self.nets_mut() {
            let len = net.num_params();
            net.set_params(&flat[k..k + len])?;
            k += len;
        }
        Ok(())
    }
}

/// `Φ(x, y) = y`, `Ψ(x, m) = x / m` for `t` layers on scalar features: the
/// pairwise network for which the graphon is a stationary point.
pub fn fixed_psi_mpnn(t: usize) -> Result<Mpnn> {
    if t == 0 {
        return Err(Error::Precondition("fixed-psi network needs at least one layer".into()));
    }
    Mpnn::new(
        1,
        vec![(MessageFn::Neighbor, UpdateFn::Ratio); t],
        Aggregation::NeighborAverage,
    )
}
