use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ISO_TOL: f64 = 1e-9;

/// A piecewise-constant graphon with block signals.
///
/// Block `a` covers `[t_{a-1}, t_a)` with `t_a = Σ_{b≤a} π_b`. Node features
/// for block `a` are row `a` of `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub block_mass: Array1<f64>,
    pub s: Array2<f64>,
    pub b: Array2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub d_min: f64,
    pub d_cmin: f64,
    pub node_ok: bool,
    pub pair_ok: bool,
}

impl SbmSpec {
    /// Build from row-major lists; shapes are checked, values are not
    /// (see [`validate_sbm`]).
    pub fn from_rows(block_mass: Vec<f64>, s: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let r = block_mass.len();
        if r == 0 {
            return Err(Error::InvalidSpec(vec!["r must be at least 1".into()]));
        }
        if s.len() != r * r {
            return Err(Error::InvalidSpec(vec![format!(
                "S has {} entries, expected r*r = {}",
                s.len(),
                r * r
            )]));
        }
        if b.is_empty() || b.len() % r != 0 {
            return Err(Error::InvalidSpec(vec![format!(
                "B has {} entries, expected a positive multiple of r = {r}",
                b.len()
            )]));
        }
        let f0 = b.len() / r;
        Ok(SbmSpec {
            block_mass: Array1::from(block_mass),
            s: Array2::from_shape_vec((r, r), s).expect("checked length"),
            b: Array2::from_shape_vec((r, f0), b).expect("checked length"),
        })
    }

    /// Three blocks with masses (0.45, 0.1, 0.45), within-block probability
    /// `diag`, and constant scalar signal.
    pub fn three_block(diag: f64) -> Self {
        SbmSpec::from_rows(
            vec![0.45, 0.1, 0.45],
            vec![diag, 0.05, 0.02, 0.05, diag, 0.05, 0.02, 0.05, diag],
            vec![1.0; 3],
        )
        .expect("static spec")
    }

    /// The model used for the convergence and stability experiments.
    pub fn reference() -> Self {
        SbmSpec::three_block(0.55)
    }

    /// The link-prediction variant with stronger within-block edges.
    pub fn reference_link_prediction() -> Self {
        SbmSpec::three_block(0.6)
    }

    pub fn r(&self) -> usize {
        self.block_mass.len()
    }

    pub fn f0(&self) -> usize {
        self.b.ncols()
    }

    /// Right endpoints `t_1, ..., t_r` of the block intervals.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.block_mass
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }

    /// Block containing position `x ∈ [0,1)`.
    pub fn block_at(&self, x: f64) -> usize {
        let t = self.boundaries();
        t.iter().position(|&ta| x < ta).unwrap_or(self.r() - 1)
    }

    /// Same spec with the signal matrix replaced.
    pub fn with_signal(&self, b: Array2<f64>) -> Result<Self> {
        if b.nrows() != self.r() || b.ncols() == 0 {
            return Err(Error::Shape(format!(
                "signal has shape {:?}, expected ({}, F0>0)",
                b.dim(),
                self.r()
            )));
        }
        Ok(SbmSpec {
            b,
            ..self.clone()
        })
    }
}

/// d_W(a) = Σ_b π_b S_ab.
pub fn graphon_degree(spec: &SbmSpec) -> Array1<f64> {
    let r = spec.r();
    Array1::from_shape_fn(r, |a| sorted_sum((0..r).map(|b| spec.s[[a, b]] * spec.block_mass[b])))
}

/// Sum in ascending order, so permuted copies of the same terms give
/// bit-identical totals (isomorphic blocks stay exactly equal).
pub(crate) fn sorted_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// c_W(a,b) = Σ_c π_c S_ac S_bc.
pub fn graphon_common_neighbors(spec: &SbmSpec) -> Array2<f64> {
    let r = spec.r();
    let mut c = Array2::zeros((r, r));
    for a in 0..r {
        for b in a..r {
            let v = sorted_sum((0..r).map(|k| spec.block_mass[k] * spec.s[[a, k]] * spec.s[[b, k]]));
            c[[a, b]] = v;
            c[[b, a]] = v;
        }
    }
    c
}

pub fn validate_sbm(spec: &SbmSpec) -> Result<ValidationReport> {
    let r = spec.r();
    let mut problems = Vec::new();
    if spec.s.dim() != (r, r) {
        problems.push(format!("S has shape {:?}, expected ({r}, {r})", spec.s.dim()));
    }
    if spec.b.nrows() != r || spec.b.ncols() == 0 {
        problems.push(format!("B has shape {:?}, expected ({r}, F0>0)", spec.b.dim()));
    }
    if !problems.is_empty() {
        return Err(Error::InvalidSpec(problems));
    }
    for (a, &p) in spec.block_mass.iter().enumerate() {
        if !(p > 0.0) || !p.is_finite() {
            problems.push(format!("block_mass[{a}] = {p} is not positive"));
        }
    }
    let total: f64 = spec.block_mass.sum();
    if (total - 1.0).abs() > 1e-12 {
        problems.push(format!("block_mass sums to {total}, not 1"));
    }
    for a in 0..r {
        for b in 0..r {
            let v = spec.s[[a, b]];
            if !(0.0..=1.0).contains(&v) {
                problems.push(format!("S[{a},{b}] = {v} outside [0,1]"));
            }
            if b > a && v != spec.s[[b, a]] {
                problems.push(format!(
                    "S not symmetric: S[{a},{b}] = {v} but S[{b},{a}] = {}",
                    spec.s[[b, a]]
                ));
            }
        }
    }
    if spec.b.iter().any(|v| !v.is_finite()) {
        problems.push("B has non-finite entries".into());
    }
    if !problems.is_empty() {
        return Err(Error::InvalidSpec(problems));
    }
    let d_min = graphon_degree(spec).iter().cloned().fold(f64::INFINITY, f64::min);
    let d_cmin = graphon_common_neighbors(spec)
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(ValidationReport {
        d_min,
        d_cmin,
        node_ok: d_min > 0.0,
        pair_ok: d_cmin > 0.0,
    })
}

/// Unordered block pairs `(a, b)`, `a < b`, that are interchangeable: equal
/// mass, equal signal, and S invariant under swapping `a` and `b`.
pub fn isomorphic_block_pairs(spec: &SbmSpec, tol: f64) -> Vec<(usize, usize)> {
    let r = spec.r();
    let swap = |a: usize, b: usize, k: usize| {
        if k == a {
            b
        } else if k == b {
            a
        } else {
            k
        }
    };
    let mut out = Vec::new();
    for a in 0..r {
        for b in (a + 1)..r {
            if (spec.block_mass[a] - spec.block_mass[b]).abs() > tol {
                continue;
            }
            let signal_eq = spec
                .b
                .row(a)
                .iter()
                .zip(spec.b.row(b))
                .all(|(x, y)| (x - y).abs() <= tol);
            if !signal_eq {
                continue;
            }
            let s_inv = (0..r).all(|i| {
                (0..r).all(|j| (spec.s[[i, j]] - spec.s[[swap(a, b, i), swap(a, b, j)]]).abs() <= tol)
            });
            if s_inv {
                out.push((a, b));
            }
        }
    }
    out
}

/// `iso[a]` lists the blocks isomorphic to `a` (excluding `a`).
pub fn iso_classes(spec: &SbmSpec, tol: f64) -> Vec<Vec<usize>> {
    let mut iso = vec![Vec::new(); spec.r()];
    for (a, b) in isomorphic_block_pairs(spec, tol) {
        iso[a].push(b);
        iso[b].push(a);
    }
    iso
}

/// Serialized form of [`SbmSpec`]: matrices flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecRecord {
    pub r: usize,
    pub block_mass: Vec<f64>,
    #[serde(rename = "S")]
    pub s: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
}

impl SpecRecord {
    pub fn into_spec(self) -> Result<SbmSpec> {
        if self.r != self.block_mass.len() {
            return Err(Error::InvalidSpec(vec![format!(
                "r = {} but block_mass has {} entries",
                self.r,
                self.block_mass.len()
            )]));
        }
        SbmSpec::from_rows(self.block_mass, self.s, self.b)
    }

    pub fn from_spec(spec: &SbmSpec) -> Self {
        SpecRecord {
            r: spec.r(),
            block_mass: spec.block_mass.to_vec(),
            s: spec.s.iter().cloned().collect(),
            b: spec.b.iter().cloned().collect(),
        }
    }
}
