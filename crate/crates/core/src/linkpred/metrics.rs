use serde::Serialize;

use crate::error::{Error, Result};

/// Confusion counts at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_scores(pos: &[f64], neg: &[f64], tau: f64) -> Self {
        let tp = pos.iter().filter(|&&s| s > tau).count();
        let fp = neg.iter().filter(|&&s| s > tau).count();
        Confusion {
            tp,
            fp,
            tn: neg.len() - fp,
            fn_: pos.len() - tp,
        }
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.tp + self.fp + self.tn + self.fn_;
        if total == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / total as f64
    }

    /// Mean of the true positive and true negative rates.
    pub fn balanced_accuracy(&self) -> f64 {
        let rate = |hit: usize, miss: usize| {
            if hit + miss == 0 {
                0.0
            } else {
                hit as f64 / (hit + miss) as f64
            }
        };
        0.5 * (rate(self.tp, self.fn_) + rate(self.tn, self.fp))
    }

    /// Matthews correlation coefficient, 0 when undefined.
    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (
            self.tp as f64,
            self.fp as f64,
            self.tn as f64,
            self.fn_ as f64,
        );
        let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        if den == 0.0 {
            0.0
        } else {
            (tp * tn - fp * fn_) / den
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// `(K, Hits@K)` in the order requested.
    pub hits: Vec<(usize, f64)>,
    pub mcc: f64,
    pub balanced_accuracy: f64,
    pub confusion: Confusion,
}

impl EvalReport {
    pub fn hits_at(&self, k: usize) -> Option<f64> {
        self.hits.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }
}

/// Fraction of positives scoring strictly above the `k`-th largest negative.
pub fn hits_at_k(pos: &[f64], neg: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > neg.len() {
        return Err(Error::Precondition(format!(
            "Hits@{k} needs between 1 and {} negatives",
            neg.len()
        )));
    }
    let mut sorted = neg.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let cut = sorted[k - 1];
    Ok(pos.iter().filter(|&&s| s > cut).count() as f64 / pos.len() as f64)
}

/// Ranking and threshold metrics for scored positive and negative pairs.
/// Scores above `tau` count as predicted edges.
pub fn evaluate(pos: &[f64], neg: &[f64], tau: f64, ks: &[usize]) -> Result<EvalReport> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Precondition(
            "evaluation needs positive and negative scores".into(),
        ));
    }
    if pos.iter().chain(neg).any(|s| s.is_nan()) {
        return Err(Error::Numerical("NaN score".into()));
    }
    let hits = ks
        .iter()
        .map(|&k| Ok((k, hits_at_k(pos, neg, k)?)))
        .collect::<Result<Vec<_>>>()?;
    let confusion = Confusion::from_scores(pos, neg, tau);
    Ok(EvalReport {
        hits,
        mcc: confusion.mcc(),
        balanced_accuracy: confusion.balanced_accuracy(),
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::sigmoid;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn hand_case() {
        let pos = [0.9, 0.4, 0.35];
        let neg = [0.8, 0.3, 0.2];
        let r = evaluate(&pos, &neg, 0.5, &[1]).unwrap();
        assert_eq!(r.hits_at(1), Some(1.0 / 3.0));
        assert_eq!(
            r.confusion,
            Confusion {
                tp: 1,
                fp: 1,
                tn: 2,
                fn_: 2
            }
        );
        assert!((r.balanced_accuracy - 0.5).abs() < 1e-15);
        // (1·2 − 1·2) / sqrt(2·3·3·4)
        assert_eq!(r.mcc, 0.0);
    }

    #[test]
    fn mcc_direct_formula() {
        let c = Confusion {
            tp: 7,
            fp: 2,
            tn: 5,
            fn_: 1,
        };
        let want = (7.0 * 5.0 - 2.0 * 1.0) / (9.0f64 * 8.0 * 7.0 * 6.0).sqrt();
        assert!((c.mcc() - want).abs() < 1e-15);
        assert_eq!(Confusion::default().mcc(), 0.0);
    }

    #[test]
    fn perfect_separation() {
        let r = evaluate(&[0.9, 0.8, 0.7], &[0.1, 0.2, 0.3], 0.5, &[1, 3]).unwrap();
        assert_eq!(r.hits, vec![(1, 1.0), (3, 1.0)]);
        assert_eq!(r.mcc, 1.0);
        assert_eq!(r.balanced_accuracy, 1.0);
    }

    #[test]
    fn ties_fail() {
        assert_eq!(hits_at_k(&[0.5, 0.6], &[0.5, 0.1], 1).unwrap(), 0.5);
    }

    #[test]
    fn errors() {
        assert!(evaluate(&[], &[0.1], 0.5, &[1]).is_err());
        assert!(evaluate(&[0.3], &[0.1], 0.5, &[2]).is_err());
        assert!(hits_at_k(&[0.3], &[0.1], 0).is_err());
    }

    #[test]
    fn random_predictor() {
        let mut r = rng::stream(4, "test");
        let pos: Vec<f64> = (0..20000).map(|_| r.random()).collect();
        let neg: Vec<f64> = (0..20000).map(|_| r.random()).collect();
        let rep = evaluate(&pos, &neg, 0.5, &[100]).unwrap();
        assert!(rep.mcc.abs() < 0.03, "{}", rep.mcc);
        assert!((rep.balanced_accuracy - 0.5).abs() < 0.015);
    }

    #[test]
    fn logit_threshold_matches_sigmoid_threshold() {
        let mut r = rng::stream(5, "test");
        let pos: Vec<f64> = (0..500).map(|_| r.random_range(-3.0..4.0)).collect();
        let neg: Vec<f64> = (0..500).map(|_| r.random_range(-4.0..3.0)).collect();
        let sp: Vec<f64> = pos.iter().map(|&z| sigmoid(z)).collect();
        let sn: Vec<f64> = neg.iter().map(|&z| sigmoid(z)).collect();
        let a = evaluate(&pos, &neg, 0.0, &[10, 50]).unwrap();
        let b = evaluate(&sp, &sn, 0.5, &[10, 50]).unwrap();
        assert_eq!(a, b);
    }
}
