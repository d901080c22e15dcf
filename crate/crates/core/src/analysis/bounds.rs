use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpnn::{MessageFn, Mpnn, MpnnLayer, UpdateFn};
use crate::sbm::{validate_sbm, SbmSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    NodeMean,
    NodeSum,
    Pair,
}

/// Per-layer ingredients. `b1_in + b2_in·‖f‖∞` bounds the layer input,
/// `b1_out + b2_out·‖f‖∞` its output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerBound {
    pub l_phi: f64,
    pub l_psi: f64,
    pub phi_bias: f64,
    pub psi_bias: f64,
    pub msg_width: usize,
    pub b1_in: f64,
    pub b2_in: f64,
    pub b1_out: f64,
    pub b2_out: f64,
    pub k: f64,
    pub d: f64,
}

/// Constants of the non-asymptotic gap bound
/// `δ ≤ (c1 + c2·‖f‖∞)·√log(2n/p)/√n` (with `2n²` inside the log for
/// pairwise networks). `c1, c2` are the mean-aggregation constants in
/// [`BoundMode::NodeMean`], the sum-aggregation ones in
/// [`BoundMode::NodeSum`] and the pairwise ones in [`BoundMode::Pair`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub mode: BoundMode,
    pub p: f64,
    pub n: usize,
    pub f_inf_norm: f64,
    /// d_min for node modes, d_cmin for pairwise.
    pub degree_floor: f64,
    pub w_inf: f64,
    pub layers: Vec<LayerBound>,
    pub c1: f64,
    pub c2: f64,
    pub bound: f64,
    /// Whether `n` is past the size threshold the guarantee assumes.
    pub large_n_ok: bool,
    /// `1 − Σ_l 2(H_l + 1)p`.
    pub confidence: f64,
}

/// `(L_Φ, ‖Φ(0,0)‖∞, L_Ψ, ‖Ψ(0,0)‖∞)`.
pub fn layer_constants(layer: &MpnnLayer) -> Result<(f64, f64, f64, f64)> {
    let (l_phi, phi_bias) = match &layer.phi {
        MessageFn::Neighbor => (1.0, 0.0),
        MessageFn::Net(net) => (net.lipschitz_upper_bound(), net.formal_bias()),
    };
    let (l_psi, psi_bias) = match &layer.psi {
        UpdateFn::Message => (1.0, 0.0),
        UpdateFn::Net(net) => (net.lipschitz_upper_bound(), net.formal_bias()),
        UpdateFn::Ratio => {
            return Err(Error::Precondition(
                "the ratio update is not Lipschitz; no bound constants exist".into(),
            ))
        }
    };
    Ok((l_phi, phi_bias, l_psi, psi_bias))
}

/// `0.01 / Σ_l 2(H_l + 1)`: a 99% guarantee.
pub fn default_p(mpnn: &Mpnn) -> f64 {
    0.01 / failure_weight(mpnn)
}

fn failure_weight(mpnn: &Mpnn) -> f64 {
    mpnn.layers
        .iter()
        .map(|l| 2.0 * (l.msg_width as f64 + 1.0))
        .sum()
}

/// `√log(2n/p) / √n`, or `√log(2n²/p) / √n` for pairwise.
pub fn rate(mode: BoundMode, n: usize, p: f64) -> f64 {
    let n = n as f64;
    let inner = match mode {
        BoundMode::Pair => 2.0 * n * n / p,
        _ => 2.0 * n / p,
    };
    inner.ln().sqrt() / n.sqrt()
}

pub fn bound_constants(
    mpnn: &Mpnn,
    f_inf_norm: f64,
    spec: &SbmSpec,
    p: f64,
    mode: BoundMode,
    n: usize,
) -> Result<BoundReport> {
    if !(p > 0.0 && p < 1.0 / failure_weight(mpnn)) {
        return Err(Error::Precondition(format!(
            "p = {p} must lie in (0, {})",
            1.0 / failure_weight(mpnn)
        )));
    }
    let rep = validate_sbm(spec)?;
    let floor = match mode {
        BoundMode::NodeMean | BoundMode::NodeSum => rep.d_min,
        BoundMode::Pair => rep.d_cmin,
    };
    if mode != BoundMode::NodeSum && !(floor > 0.0) {
        return Err(Error::Precondition(format!(
            "bound needs a positive degree floor, got {floor}"
        )));
    }
    let w_inf = spec.s.iter().cloned().fold(0.0, f64::max);
    let sqrt2 = std::f64::consts::SQRT_2;
    let (ratio, coef) = match mode {
        BoundMode::NodeSum => (w_inf, 2.0 * sqrt2),
        _ => (
            w_inf / floor,
            4.0 * sqrt2 / (floor * floor) + 2.0 * sqrt2 / floor,
        ),
    };
    let rate_n = rate(mode, n, p);

    let mut layers = Vec::with_capacity(mpnn.depth());
    let (mut b1, mut b2) = (0.0, 1.0);
    for layer in &mpnn.layers {
        let (l_phi, phi_bias, l_psi, psi_bias) = layer_constants(layer)?;
        let growth = l_psi * (1.0 + ratio * l_phi);
        let b1_out = growth * b1 + l_psi * ratio * phi_bias + psi_bias;
        let b2_out = growth * b2;
        let k = match mode {
            BoundMode::NodeSum => (l_psi * l_psi + 2.0 * l_phi * l_phi * l_psi * l_psi).sqrt(),
            _ => (l_psi * l_psi + 8.0 * l_phi * l_phi * l_psi * l_psi / (floor * floor)).sqrt(),
        };
        let input_norm = b1 + b2 * f_inf_norm;
        let d = l_psi * coef * (l_phi * input_norm + phi_bias) * rate_n;
        layers.push(LayerBound {
            l_phi,
            l_psi,
            phi_bias,
            psi_bias,
            msg_width: layer.msg_width,
            b1_in: b1,
            b2_in: b2,
            b1_out,
            b2_out,
            k,
            d,
        });
        b1 = b1_out;
        b2 = b2_out;
    }

    let mut c1 = 0.0;
    let mut c2 = 0.0;
    for (l, lb) in layers.iter().enumerate() {
        let tail: f64 = layers[l + 1..].iter().map(|x| x.k).product();
        c1 += lb.l_psi * coef * (lb.l_phi * lb.b1_in + lb.phi_bias) * tail;
        c2 += lb.l_psi * coef * lb.l_phi * lb.b2_in * tail;
    }
    let large_n_ok = match mode {
        BoundMode::NodeSum => true,
        _ => 1.0 / rate_n >= 4.0 * sqrt2 / floor,
    };
    Ok(BoundReport {
        mode,
        p,
        n,
        f_inf_norm,
        degree_floor: floor,
        w_inf,
        layers,
        c1,
        c2,
        bound: (c1 + c2 * f_inf_norm) * rate_n,
        large_n_ok,
        confidence: 1.0 - failure_weight(mpnn) * p,
    })
}

impl BoundReport {
    pub fn bound_at(&self, n: usize) -> f64 {
        (self.c1 + self.c2 * self.f_inf_norm) * rate(self.mode, n, self.p)
    }
}
