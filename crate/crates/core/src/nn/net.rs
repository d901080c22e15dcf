use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation's output.
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }

    pub fn lipschitz(self) -> f64 {
        1.0
    }
}

impl OutputActivation {
    fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => z,
            OutputActivation::Sigmoid => sigmoid(z),
        }
    }

    fn slope(self, a: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Sigmoid => a * (1.0 - a),
        }
    }

    pub fn lipschitz(self) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Sigmoid => 0.25,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Dense feed-forward network. `weights[l]` has shape `(dims[l+1], dims[l])`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardNet {
    pub dims: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub activation: Activation,
    pub output_activation: OutputActivation,
}

/// Gradients with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Layer outputs saved by [`FeedForwardNet::forward_batch`] for the
/// backward pass. `acts[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().expect("cache holds the input at least")
    }

    pub fn into_output(mut self) -> Array2<f64> {
        self.acts.pop().expect("cache holds the input at least")
    }
}

impl FeedForwardNet {
    /// Weights and biases uniform in `±1/√fan_in`.
    pub fn init(
        dims: &[usize],
        activation: Activation,
        output_activation: OutputActivation,
        seed: u64,
    ) -> Result<Self> {
        let mut net = Self::zeros(dims, activation, output_activation)?;
        let mut r = rng::stream(seed, "init");
        for (w, b) in net.weights.iter_mut().zip(net.biases.iter_mut()) {
            let bound = 1.0 / (w.ncols() as f64).sqrt();
            w.mapv_inplace(|_| r.random_range(-bound..bound));
            b.mapv_inplace(|_| r.random_range(-bound..bound));
        }
        Ok(net)
    }

    pub fn zeros(
        dims: &[usize],
        activation: Activation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid layer widths {dims:?}")));
        }
        let weights = dims.windows(2).map(|w| Array2::zeros((w[1], w[0]))).collect();
        let biases = dims[1..].iter().map(|&d| Array1::zeros(d)).collect();
        Ok(FeedForwardNet {
            dims: dims.to_vec(),
            weights,
            biases,
            activation,
            output_activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn activate(&self, layer: usize, z: &mut Array2<f64>) {
        if layer + 1 == self.num_layers() {
            let f = self.output_activation;
            z.mapv_inplace(|v| f.apply(v));
        } else {
            let f = self.activation;
            z.mapv_inplace(|v| f.apply(v));
        }
    }

    fn slope(&self, layer: usize, a: f64) -> f64 {
        if layer + 1 == self.num_layers() {
            self.output_activation.slope(a)
        } else {
            self.activation.slope(a)
        }
    }

    fn check_input(&self, width: usize) -> Result<()> {
        if width != self.input_dim() {
            return Err(Error::Shape(format!(
                "net expects input width {}, got {width}",
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Row-wise forward pass over a `(batch, input_dim)` matrix.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(x.ncols())?;
        let mut acts = Vec::with_capacity(self.num_layers() + 1);
        acts.push(x.to_owned());
        for l in 0..self.num_layers() {
            let mut z = acts[l].dot(&self.weights[l].t());
            z += &self.biases[l];
            self.activate(l, &mut z);
            acts.push(z);
        }
        Ok(ForwardCache { acts })
    }

    pub fn eval_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_batch(x)?.into_output())
    }

    /// Gradients of `Σ_rows ⟨grad_out_row, output_row⟩` with respect to the
    /// parameters and to the input.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        grad_out: ArrayView2<f64>,
    ) -> Result<(NetGrads, Array2<f64>)> {
        if grad_out.dim() != cache.output().dim() {
            return Err(Error::Shape(format!(
                "output gradient has shape {:?}, expected {:?}",
                grad_out.dim(),
                cache.output().dim()
            )));
        }
        let layers = self.num_layers();
        let mut gw = vec![Array2::zeros((0, 0)); layers];
        let mut gb = vec![Array1::zeros(0); layers];
        let mut g = grad_out.to_owned();
        for l in (0..layers).rev() {
            let out = &cache.acts[l + 1];
            g.zip_mut_with(out, |gv, &a| *gv *= self.slope(l, a));
            gw[l] = g.t().dot(&cache.acts[l]);
            gb[l] = g.sum_axis(Axis(0));
            g = g.dot(&self.weights[l]);
        }
        Ok((
            NetGrads {
                weights: gw,
                biases: gb,
            },
            g,
        ))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let xm = ArrayView2::from_shape((1, x.len()), x).expect("row shape");
        Ok(self.eval_batch(xm)?.into_raw_vec_and_offset().0)
    }

    pub fn backward(&self, x: &[f64], grad_out: &[f64]) -> Result<(NetGrads, Vec<f64>)> {
        let xm = ArrayView2::from_shape((1, x.len()), x).expect("row shape");
        let cache = self.forward_batch(xm)?;
        let gm = ArrayView2::from_shape((1, grad_out.len()), grad_out)
            .map_err(|e| Error::Shape(e.to_string()))?;
        let (grads, gx) = self.backward_batch(&cache, gm)?;
        Ok((grads, gx.into_raw_vec_and_offset().0))
    }

    /// ∞-norm Lipschitz bound: product of the max absolute row sums of the
    /// weight matrices times the activation constants.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        let mut bound = 1.0;
        for (l, w) in self.weights.iter().enumerate() {
            bound *= inf_operator_norm(w.view());
            bound *= if l + 1 == self.num_layers() {
                self.output_activation.lipschitz()
            } else {
                self.activation.lipschitz()
            };
        }
        bound
    }

    /// ‖net(0)‖∞.
    pub fn formal_bias(&self) -> f64 {
        let zero = vec![0.0; self.input_dim()];
        self.forward(&zero)
            .expect("width matches")
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Parameters in deterministic order: per layer, weights row-major then
    /// biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} parameters supplied, net has {}",
                flat.len(),
                self.num_params()
            )));
        }
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut().chain(b.iter_mut()) {
                *v = flat[k];
                k += 1;
            }
        }
        Ok(())
    }
}

impl NetGrads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

pub fn inf_operator_norm(w: ArrayView2<f64>) -> f64 {
    w.rows()
        .into_iter()
        .map(|r: ArrayView1<f64>| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest relative discrepancy between `backward` and central differences
/// of `⟨grad_out, net(x)⟩`, over parameters and inputs.
///
/// Relative error is `|a − f| / max(|a|, |f|, 1e-5)`, so gradients near zero
/// are compared absolutely.
pub fn gradient_check(net: &FeedForwardNet, x: &[f64], grad_out: &[f64], h: f64) -> Result<f64> {
    let (grads, gx) = net.backward(x, grad_out)?;
    let objective = |n: &FeedForwardNet, input: &[f64]| -> f64 {
        n.forward(input)
            .expect("shape checked")
            .iter()
            .zip(grad_out)
            .map(|(a, b)| a * b)
            .sum()
    };
    let rel = |a: f64, f: f64| (a - f).abs() / a.abs().max(f.abs()).max(1e-5);
    let mut worst: f64 = 0.0;
    let analytic = grads.flatten();
    let base = net.params();
    let mut probe = net.clone();
    for (k, &a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[k] = base[k] + h;
        probe.set_params(&p)?;
        let up = objective(&probe, x);
        p[k] = base[k] - h;
        probe.set_params(&p)?;
        let down = objective(&probe, x);
        worst = worst.max(rel(a, (up - down) / (2.0 * h)));
    }
    for (k, &a) in gx.iter().enumerate() {
        let mut xp = x.to_vec();
        xp[k] = x[k] + h;
        let up = objective(net, &xp);
        xp[k] = x[k] - h;
        let down = objective(net, &xp);
        worst = worst.max(rel(a, (up - down) / (2.0 * h)));
    }
    Ok(worst)
}
