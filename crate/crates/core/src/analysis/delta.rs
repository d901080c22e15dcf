use crate::error::{Error, Result};
use crate::node_mpnn::NodeEmbeddings;
use crate::pair_mpnn::PairEmbeddings;

/// `max_i ‖a_i − b_i‖∞` over node rows.
pub fn delta_node(a: &NodeEmbeddings, b: &NodeEmbeddings) -> Result<f64> {
    if a.values.dim() != b.values.dim() {
        return Err(Error::Shape(format!(
            "node embeddings {:?} vs {:?}",
            a.values.dim(),
            b.values.dim()
        )));
    }
    Ok(a.values
        .iter()
        .zip(b.values.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

fn check_pairs(a: &PairEmbeddings, b: &PairEmbeddings) -> Result<()> {
    if a.width() != b.width() || a.n() != b.n() {
        return Err(Error::Shape(format!(
            "pair embeddings n={} F={} vs n={} F={}",
            a.n(),
            a.width(),
            b.n(),
            b.width()
        )));
    }
    Ok(())
}

/// `max_{i,j} ‖a_ij − b_ij‖∞` over all ordered pairs, diagonal included.
pub fn delta_pair(a: &PairEmbeddings, b: &PairEmbeddings) -> Result<f64> {
    check_pairs(a, b)?;
    Ok(a.channels
        .iter()
        .zip(&b.channels)
        .flat_map(|(x, y)| x.iter().zip(y.iter()))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// As [`delta_pair`] but over pairs of distinct nodes only.
///
/// A node's common neighbors with itself are its own neighbors, so on the
/// diagonal the discrete normalizer tracks the degree rather than the
/// graphon common-neighbor fraction and the two passes need not agree.
pub fn delta_pair_offdiag(a: &PairEmbeddings, b: &PairEmbeddings) -> Result<f64> {
    check_pairs(a, b)?;
    let mut m: f64 = 0.0;
    for (x, y) in a.channels.iter().zip(&b.channels) {
        for ((i, j), v) in x.indexed_iter() {
            if i != j {
                m = m.max((v - y[[i, j]]).abs());
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node_mpnn::EmbeddingKind;
    use ndarray::{array, Array2};

    fn node(v: Array2<f64>) -> NodeEmbeddings {
        NodeEmbeddings {
            values: v,
            kind: EmbeddingKind::Discrete,
        }
    }

    #[test]
    fn node_cases() {
        let a = node(array![[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]]);
        assert_eq!(delta_node(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.values[[1, 0]] += 0.3;
        assert!((delta_node(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        let c = node(array![[0.0, 0.0], [1.0, 0.0], [0.0, -2.0]]);
        // row gaps: max(0.1,0.2)=0.2, max(0.7,0.4)=0.7, max(0.5,2.6)=2.6
        assert!((delta_node(&a, &c).unwrap() - 2.6).abs() < 1e-15);
        assert!(delta_node(&a, &node(Array2::zeros((2, 2)))).is_err());
    }

    #[test]
    fn pair_cases() {
        let a = PairEmbeddings {
            channels: vec![array![[1.0, 0.5], [0.5, 1.0]], array![[0.0, 0.2], [0.2, 0.0]]],
        };
        assert_eq!(delta_pair(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.channels[1][[0, 1]] -= 0.3;
        assert!((delta_pair(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        let mut d = a.clone();
        d.channels[0][[0, 0]] = 5.0;
        d.channels[0][[1, 0]] = 0.4;
        assert_eq!(delta_pair(&a, &d).unwrap(), 4.0);
        assert!((delta_pair_offdiag(&a, &d).unwrap() - 0.1).abs() < 1e-15);
    }
}
