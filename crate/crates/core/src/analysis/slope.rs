use std::collections::BTreeMap;

use serde::Serialize;

use super::sweep::ConvergenceRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Per-n medians of positive δ, in increasing n.
pub fn medians_by_n(records: &[ConvergenceRecord]) -> Vec<(usize, f64)> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut dropped = 0;
    for r in records {
        if r.delta > 0.0 && r.delta.is_finite() {
            by_n.entry(r.n).or_default().push(r.delta);
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::warn!("slope fit ignores {dropped} non-positive or non-finite deltas");
    }
    by_n.into_iter()
        .map(|(n, mut v)| (n, median(&mut v)))
        .collect()
}

/// Least squares of `ln(median δ)` on `ln n`.
pub fn loglog_slope(records: &[ConvergenceRecord]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = medians_by_n(records)
        .into_iter()
        .map(|(n, d)| ((n as f64).ln(), d.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Precondition(format!(
            "slope fit needs at least 3 distinct sizes with positive delta, got {}",
            pts.len()
        )));
    }
    Ok(least_squares(&pts))
}

pub fn least_squares(pts: &[(f64, f64)]) -> SlopeFit {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    SlopeFit {
        slope,
        intercept,
        r2,
    }
}
