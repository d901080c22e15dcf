use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{build_test, build_train, LinkDataset, Scenario};
use super::metrics::{evaluate, EvalReport};
use super::model::{oracle_scores, HeadInput, LinkModel, DEFAULT_TAU};
use super::train::{train_link_model, TrainLog};
use crate::error::{Error, Result};
use crate::mpnn::{fixed_psi_mpnn, Aggregation, Mpnn};
use crate::nn::sigmoid;
use crate::rng::derive_seed;
use crate::sbm::SbmSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// GraphSAGE-style node embeddings trained end to end with the head.
    Node,
    /// `Φ = y`, `Ψ = x / m` pairwise embeddings with a trained head.
    PairFixed,
    /// Pairwise embeddings with a learned update net, trained end to end.
    PairLearned,
    /// Scores by the true edge probability of each pair.
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Node, Method::PairFixed, Method::PairLearned, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Node => "node",
            Method::PairFixed => "pair_fixed",
            Method::PairLearned => "pair_learned",
            Method::Oracle => "oracle",
        }
    }
}

/// Optional grid over head depth, head width and learning rate, selected on
/// validation accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchGrid {
    pub layers: Vec<usize>,
    pub widths: Vec<usize>,
    pub lr: Vec<f64>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            layers: vec![2, 3],
            widths: vec![5, 10],
            lr: vec![1e-3, 5e-4, 1e-4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    pub n_tr: usize,
    pub n_te: usize,
    pub runs: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub epochs: usize,
    pub lr: f64,
    pub head_hidden: Vec<usize>,
    pub head_input: HeadInput,
    /// Node backbone widths `[F_0, ..., F_T]` and update-net hidden width.
    pub node_widths: Vec<usize>,
    pub node_hidden: usize,
    pub pair_depth: usize,
    /// Learned pairwise backbone widths and update-net hidden width.
    pub learn_widths: Vec<usize>,
    pub learn_hidden: usize,
    pub learn_epochs: usize,
    pub ks: Vec<usize>,
    pub search: Option<SearchGrid>,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            n_tr: 500,
            n_te: 2000,
            runs: 10,
            seed: 0,
            methods: Method::ALL.to_vec(),
            epochs: 300,
            lr: 0.01,
            head_hidden: vec![10, 10, 10],
            head_input: HeadInput::Concat,
            node_widths: vec![1, 10, 10],
            node_hidden: 10,
            pair_depth: 2,
            learn_widths: vec![1, 2, 1],
            learn_hidden: 5,
            learn_epochs: 100,
            ks: vec![10, 50, 100],
            search: None,
        }
    }
}

impl TableConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_tr < 2 || self.n_te < 2 {
            problems.push(format!("graph sizes must be at least 2 (n_tr = {}, n_te = {})", self.n_tr, self.n_te));
        }
        if self.runs == 0 {
            problems.push("runs must be positive".into());
        }
        if self.methods.is_empty() {
            problems.push("no methods selected".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            problems.push(format!("learning rate {} must be positive", self.lr));
        }
        if self.node_widths.len() < 2 || self.learn_widths.len() < 2 {
            problems.push("backbone widths need at least one layer".into());
        }
        if self.node_widths.first() != Some(&1) || self.learn_widths.first() != Some(&1) {
            problems.push("backbones start from one input channel".into());
        }
        if self.pair_depth == 0 {
            problems.push("pair_depth must be positive".into());
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            problems.push("ks must be a nonempty list of positive ranks".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

/// Metrics of one method on one scenario in one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub scenario: Scenario,
    pub method: Method,
    pub report: EvalReport,
    pub best_epoch: Option<usize>,
}

/// Mean and sample standard deviation of one metric over runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub scenario: Scenario,
    pub method: Method,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableResult {
    pub records: Vec<RunRecord>,
    pub cells: Vec<TableCell>,
}

/// Untrained model for `method`, seeded as the table runs seed it.
pub fn fresh_model(cfg: &TableConfig, method: Method, hidden: &[usize], seed: u64) -> Result<LinkModel> {
    let seed = derive_seed(seed, method.name());
    match method {
        Method::Node => {
            let mpnn = Mpnn::graphsage(
                &cfg.node_widths,
                cfg.node_hidden,
                Aggregation::NeighborAverage,
                derive_seed(seed, "backbone"),
            )?;
            LinkModel::node(mpnn, cfg.head_input, hidden, true, derive_seed(seed, "head"))
        }
        Method::PairFixed => LinkModel::pair(fixed_psi_mpnn(cfg.pair_depth)?, hidden, false, derive_seed(seed, "head")),
        Method::PairLearned => {
            let mpnn = Mpnn::pair_learned(&cfg.learn_widths, cfg.learn_hidden, derive_seed(seed, "backbone"))?;
            LinkModel::pair(mpnn, hidden, true, derive_seed(seed, "head"))
        }
        Method::Oracle => Err(Error::Precondition("the oracle has no model".into())),
    }
}

/// Train one method, optionally selecting head shape and learning rate on
/// validation accuracy (earliest grid point on ties).
pub fn fit_method(cfg: &TableConfig, method: Method, train: &LinkDataset, seed: u64) -> Result<(LinkModel, TrainLog)> {
    let epochs = if method == Method::PairLearned { cfg.learn_epochs } else { cfg.epochs };
    let Some(grid) = &cfg.search else {
        let model = fresh_model(cfg, method, &cfg.head_hidden, seed)?;
        return train_link_model(&model, train, epochs, cfg.lr);
    };
    let mut best: Option<(LinkModel, TrainLog)> = None;
    for &layers in &grid.layers {
        for &width in &grid.widths {
            for &lr in &grid.lr {
                let model = fresh_model(cfg, method, &vec![width; layers], seed)?;
                let out = train_link_model(&model, train, epochs, lr)?;
                log::debug!(
                    "{}: {layers}x{width} lr {lr} -> val {:.4}",
                    method.name(),
                    out.1.best_val_accuracy
                );
                if best.as_ref().is_none_or(|b| out.1.best_val_accuracy > b.1.best_val_accuracy) {
                    best = Some(out);
                }
            }
        }
    }
    best.ok_or_else(|| Error::Config("empty search grid".into()))
}

/// Probabilities for the test positives and negatives of `data`.
pub fn score_test(model: &LinkModel, data: &LinkDataset) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = &data.observed;
    let emb = model.embed(g, &model.stats(g))?;
    let p = model.logits_from(&emb, &data.test.pos)?;
    let n = model.logits_from(&emb, &data.test.neg)?;
    Ok((p.into_iter().map(sigmoid).collect(), n.into_iter().map(sigmoid).collect()))
}

fn run_once(spec: &SbmSpec, cfg: &TableConfig, run: usize) -> Result<Vec<RunRecord>> {
    let seed = derive_seed(cfg.seed, &format!("run-{run}"));
    let train = build_train(spec, cfg.n_tr, derive_seed(seed, "train"))?;
    let tests = Scenario::ALL
        .iter()
        .map(|&s| build_test(spec, &train, cfg.n_te, derive_seed(seed, "test"), s))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &method in &cfg.methods {
        let fitted = match method {
            Method::Oracle => None,
            _ => Some(fit_method(cfg, method, &train, seed)?),
        };
        for test in &tests {
            let (pos, neg, best_epoch) = match &fitted {
                None => (
                    oracle_scores(spec, &test.full, &test.test.pos),
                    oracle_scores(spec, &test.full, &test.test.neg),
                    None,
                ),
                Some((model, log)) => {
                    let (p, n) = score_test(model, test)?;
                    (p, n, Some(log.best_epoch))
                }
            };
            out.push(RunRecord {
                run,
                scenario: test.scenario,
                method,
                report: evaluate(&pos, &neg, DEFAULT_TAU, &cfg.ks)?,
                best_epoch,
            });
        }
        log::info!("run {run}: {} done", method.name());
    }
    Ok(out)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Metric names in table order.
pub fn metric_names(ks: &[usize]) -> Vec<String> {
    let mut names: Vec<String> = ks.iter().map(|k| format!("hits@{k}")).collect();
    names.push("mcc".into());
    names.push("balanced_accuracy".into());
    names
}

fn metric_values(r: &EvalReport) -> Vec<f64> {
    let mut v: Vec<f64> = r.hits.iter().map(|h| h.1).collect();
    v.push(r.mcc);
    v.push(r.balanced_accuracy);
    v
}

fn summarize(cfg: &TableConfig, records: &[RunRecord]) -> Vec<TableCell> {
    let names = metric_names(&cfg.ks);
    let mut cells = Vec::new();
    for &scenario in &Scenario::ALL {
        for &method in &cfg.methods {
            let rows: Vec<Vec<f64>> = records
                .iter()
                .filter(|r| r.scenario == scenario && r.method == method)
                .map(|r| metric_values(&r.report))
                .collect();
            for (m, name) in names.iter().enumerate() {
                let col: Vec<f64> = rows.iter().map(|r| r[m]).collect();
                let (mean, std) = mean_std(&col);
                cells.push(TableCell {
                    scenario,
                    method,
                    metric: name.clone(),
                    mean,
                    std,
                    runs: col.len(),
                });
            }
        }
    }
    cells
}

/// Every method on every scenario over `cfg.runs` independent runs.
pub fn run_table(spec: &SbmSpec, cfg: &TableConfig) -> Result<TableResult> {
    cfg.validate()?;
    let per_run = (0..cfg.runs)
        .into_par_iter()
        .map(|r| run_once(spec, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<RunRecord> = per_run.into_iter().flatten().collect();
    let cells = summarize(cfg, &records);
    Ok(TableResult { records, cells })
}

impl TableResult {
    pub fn cell(&self, scenario: Scenario, method: Method, metric: &str) -> Option<&TableCell> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.method == method && c.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("scenario,method,metric,mean,std,runs\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{:.6},{}",
                c.scenario.name(),
                c.method.name(),
                c.metric,
                c.mean,
                c.std,
                c.runs
            );
        }
        s
    }

    /// One block per scenario; entries are percentages, `mean (std)`.
    pub fn to_text(&self) -> String {
        let mut metrics: Vec<&str> = Vec::new();
        let mut methods: Vec<Method> = Vec::new();
        for c in &self.cells {
            if !metrics.contains(&c.metric.as_str()) {
                metrics.push(&c.metric);
            }
            if !methods.contains(&c.method) {
                methods.push(c.method);
            }
        }
        let width = 18;
        let mut s = String::new();
        for &scenario in &Scenario::ALL {
            let _ = writeln!(s, "{}", scenario.name());
            let _ = write!(s, "{:<14}", "method");
            for m in &metrics {
                let _ = write!(s, "{m:>width$}");
            }
            s.push('\n');
            for &method in &methods {
                let _ = write!(s, "{:<14}", method.name());
                for m in &metrics {
                    let entry = self
                        .cell(scenario, method, m)
                        .map(|c| format!("{:.2} ({:.2})", 100.0 * c.mean, 100.0 * c.std))
                        .unwrap_or_default();
                    let _ = write!(s, "{entry:>width$}");
                }
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> TableConfig {
        TableConfig {
            n_tr: 150,
            n_te: 300,
            runs: 2,
            epochs: 5,
            learn_epochs: 2,
            node_widths: vec![1, 3],
            node_hidden: 3,
            head_hidden: vec![4],
            ks: vec![1, 5],
            ..TableConfig::default()
        }
    }

    #[test]
    fn sample_std() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn layout_and_determinism() {
        let spec = SbmSpec::reference_link_prediction();
        let cfg = tiny();
        let a = run_table(&spec, &cfg).unwrap();
        assert_eq!(a.records.len(), cfg.runs * 3 * 4);
        assert_eq!(a.cells.len(), 3 * 4 * 4);
        let csv = a.to_csv();
        assert!(csv.starts_with("scenario,method,metric,mean,std,runs\n"));
        assert_eq!(csv.lines().count(), 1 + 48);
        assert!(csv.contains("inductive_ood,oracle,mcc,"));
        assert!(a.to_text().contains("pair_learned"));
        let b = run_table(&spec, &cfg).unwrap();
        assert_eq!(csv, b.to_csv());
        for c in &a.cells {
            assert!(c.mean.is_finite() && c.std >= 0.0 && c.runs == 2);
        }
    }

    #[test]
    fn oracle_mcc_without_training() {
        let spec = SbmSpec::reference_link_prediction();
        let cfg = TableConfig {
            methods: vec![Method::Oracle],
            runs: 3,
            n_tr: 400,
            n_te: 800,
            ..TableConfig::default()
        };
        let t = run_table(&spec, &cfg).unwrap();
        for s in Scenario::ALL {
            let mcc = t.cell(s, Method::Oracle, "mcc").unwrap().mean;
            assert!((mcc - 0.9376).abs() < 0.05, "{}: {mcc}", s.name());
        }
    }

    #[test]
    fn config_errors() {
        let bad = TableConfig {
            runs: 0,
            ks: vec![0],
            ..TableConfig::default()
        };
        let Err(Error::Config(msg)) = bad.validate() else {
            panic!("expected a config error")
        };
        assert!(msg.contains("runs") && msg.contains("ks"));
        let grid: SearchGrid = toml::from_str("layers = [2]").unwrap();
        assert_eq!(grid.widths, vec![5, 10]);
    }
}
