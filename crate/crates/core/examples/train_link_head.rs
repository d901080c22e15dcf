//! Train a node-embedding and a pairwise link predictor on a small graph and
//! evaluate both on a graph four times larger.
//!
//! ```bash
//! cargo run --release --example train_link_head
//! ```

use graphon_linkpred::linkpred::{
    build_scenario, evaluate, oracle_scores, train_link_model, HeadInput, LinkModel, Scenario, DEFAULT_TAU,
};
use graphon_linkpred::mpnn::{fixed_psi_mpnn, Aggregation, Mpnn};
use graphon_linkpred::nn::sigmoid;
use graphon_linkpred::sbm::SbmSpec;

fn main() -> graphon_linkpred::Result<()> {
    let spec = SbmSpec::reference_link_prediction();
    let (train, test) = build_scenario(&spec, 400, 1600, 3, Scenario::InductiveOod)?;
    println!(
        "train {} / val {} / test {} positives",
        train.train.pos.len(),
        train.val.pos.len(),
        test.test.pos.len()
    );
    let node = LinkModel::node(
        Mpnn::graphsage(&[1, 10, 10], 10, Aggregation::NeighborAverage, 1)?,
        HeadInput::Concat,
        &[10, 10],
        true,
        2,
    )?;
    let pair = LinkModel::pair(fixed_psi_mpnn(2)?, &[10, 10], false, 2)?;
    for (name, model) in [("node", node), ("pair", pair)] {
        let (fitted, log) = train_link_model(&model, &train, 200, 0.01)?;
        let g = &test.observed;
        let score = |pairs| -> graphon_linkpred::Result<Vec<f64>> {
            Ok(fitted.logits(g, pairs)?.into_iter().map(sigmoid).collect())
        };
        let rep = evaluate(&score(&test.test.pos)?, &score(&test.test.neg)?, DEFAULT_TAU, &[50])?;
        println!(
            "{name}: best epoch {} (val acc {:.3}), test mcc {:.3}, balanced acc {:.3}, hits@50 {:.3}",
            log.best_epoch,
            log.best_val_accuracy,
            rep.mcc,
            rep.balanced_accuracy,
            rep.hits_at(50).unwrap_or(f64::NAN)
        );
    }
    let g = &test.observed;
    let rep = evaluate(
        &oracle_scores(&spec, g, &test.test.pos),
        &oracle_scores(&spec, g, &test.test.neg),
        DEFAULT_TAU,
        &[50],
    )?;
    println!("oracle: mcc {:.3}", rep.mcc);
    Ok(())
}
