//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use graphon_linkpred::analysis::{NodeInit, SweepMode};
use graphon_linkpred::experiment::{converge, converge_mpnn, stability, ConvergeConfig, StabilityConfig};
use graphon_linkpred::linkpred::{
    build_train, fresh_model, loss_and_grad, run_table, LinkModel, Method, Scenario, TableConfig,
};
use graphon_linkpred::mpnn::{fixed_psi_mpnn, Mpnn};
use graphon_linkpred::nn::gradient_check;
use graphon_linkpred::node_mpnn::degree_signal;
use graphon_linkpred::pair_mpnn::cmpnn_pair_sbm;
use graphon_linkpred::rng;
use graphon_linkpred::sbm::SbmSpec;
use rand::Rng;
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
    /// Named CSV outputs, compared byte for byte on the rerun.
    csv: Vec<(String, String)>,
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn slope_of(summary: &str) -> f64 {
    json_lines(summary)
        .into_iter()
        .find(|v| v["kind"] == "fit")
        .and_then(|v| v["slope"].as_f64())
        .expect("fit line")
}

fn stationarity() -> Outcome {
    let mut specs = vec![SbmSpec::reference()];
    specs.extend((0..20).map(|s| common::random_spec(s, 2 + s as usize % 4)));
    let mut csv = String::from("spec,layer,max_err\n");
    let mut worst: f64 = 0.0;
    for (k, spec) in specs.iter().enumerate() {
        for t in 1..=3 {
            let out = cmpnn_pair_sbm(spec, &fixed_psi_mpnn(t).unwrap(), &[spec.s.clone()]).unwrap();
            let err = out.channels[0]
                .iter()
                .zip(spec.s.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst = worst.max(err);
            csv.push_str(&format!("{k},{t},{err}\n"));
        }
    }
    Outcome {
        pass: worst < 1e-12,
        detail: format!("21 specs x 3 layers, max err {worst:.2e} (< 1e-12)"),
        csv: vec![("stationarity.csv".into(), csv)],
    }
}

fn brute_force() -> Outcome {
    let mut csv = String::from("instance,max_err\n");
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let e = common::oracle_instance_error(seed);
        worst = worst.max(e);
        csv.push_str(&format!("{seed},{e}\n"));
    }
    Outcome {
        pass: worst < 1e-12,
        detail: format!("50 instances, max err {worst:.2e} (< 1e-12)"),
        csv: vec![("oracles.csv".into(), csv)],
    }
}

fn slope_check(cfg: &ConvergeConfig, name: &str) -> Outcome {
    let (csv, summary) = converge(&SbmSpec::reference(), cfg).unwrap();
    let slope = slope_of(&summary);
    Outcome {
        pass: (-0.7..=-0.3).contains(&slope),
        detail: format!("slope {slope:.3} (in [-0.7, -0.3])"),
        csv: vec![(format!("{name}.csv"), csv), (format!("{name}.jsonl"), summary)],
    }
}

fn bound_cfg() -> ConvergeConfig {
    ConvergeConfig {
        n: Some(vec![1024]),
        seeds: (0..50).collect(),
        init: NodeInit::Signal,
        ..ConvergeConfig::default()
    }
}

fn bound_spec() -> SbmSpec {
    let spec = SbmSpec::reference();
    spec.with_signal(degree_signal(&spec)).unwrap()
}

fn bound_validity() -> Outcome {
    let (csv, summary) = converge(&bound_spec(), &bound_cfg()).unwrap();
    let line = json_lines(&summary).into_iter().find(|v| v["kind"] == "bound").unwrap();
    let freq = line["bound_validity"].as_f64().unwrap();
    Outcome {
        pass: freq >= 0.95,
        detail: format!(
            "covered {:.0}% of 50 runs at n=1024 (>= 95%), bound {}",
            100.0 * freq,
            csv.lines().nth(1).and_then(|l| l.rsplit(',').next()).unwrap_or("?")
        ),
        csv: vec![("bound.csv".into(), csv)],
    }
}

fn stability_cfg() -> StabilityConfig {
    StabilityConfig {
        n: vec![512, 4096],
        ..StabilityConfig::default()
    }
}

fn iso_collapse() -> Outcome {
    let (csv, summary) = stability(&SbmSpec::reference(), &stability_cfg()).unwrap();
    let lines = json_lines(&summary);
    let get = |i: usize, k: &str| lines[i][k].as_f64().unwrap();
    let (iso_s, iso_l) = (get(0, "iso_median"), get(1, "iso_median"));
    let (non_s, non_l) = (get(0, "non_iso_median"), get(1, "non_iso_median"));
    Outcome {
        pass: iso_l < 0.5 * iso_s && non_l > 0.5 * non_s,
        detail: format!(
            "iso median {iso_s:.3e} -> {iso_l:.3e} (< half), non-iso {non_s:.3e} -> {non_l:.3e} (> half)"
        ),
        csv: vec![("stability.csv".into(), csv), ("stability.jsonl".into(), summary)],
    }
}

fn desk_table() -> Outcome {
    let cfg = TableConfig::default();
    let table = run_table(&SbmSpec::reference_link_prediction(), &cfg).unwrap();
    let mean = |s, m, metric| table.cell(s, m, metric).unwrap().mean;
    let mut checks = Vec::new();
    for s in Scenario::ALL {
        let v = mean(s, Method::Oracle, "mcc");
        checks.push((format!("oracle {} mcc {v:.3}", s.name()), (v - 0.93).abs() <= 0.05));
    }
    let ood = Scenario::InductiveOod;
    let gap = (mean(ood, Method::PairFixed, "mcc") - mean(ood, Method::Oracle, "mcc")).abs();
    checks.push((format!("pair_fixed ood gap {gap:.3}"), gap <= 0.05));
    let bal = mean(ood, Method::Node, "balanced_accuracy");
    checks.push((format!("node ood bal-acc {bal:.3}"), (0.45..=0.55).contains(&bal)));
    let mcc = mean(ood, Method::Node, "mcc");
    checks.push((format!("node ood mcc {mcc:.3}"), (-0.2..=0.2).contains(&mcc)));
    let same = mean(Scenario::InductiveSame, Method::PairFixed, "mcc");
    checks.push((format!("pair_fixed same mcc {same:.3}"), same > 0.85));
    Outcome {
        pass: checks.iter().all(|c| c.1),
        detail: checks
            .iter()
            .map(|(d, ok)| if *ok { d.clone() } else { format!("{d} [FAIL]") })
            .collect::<Vec<_>>()
            .join("; "),
        csv: vec![("table.csv".into(), table.to_csv())],
    }
}

/// Largest relative error of `loss_and_grad` against central differences,
/// with gradients below `1e-5` compared absolutely.
fn model_gradient_error(model: &LinkModel, seed: u64) -> f64 {
    let data = build_train(&SbmSpec::reference_link_prediction(), 80, seed).unwrap();
    let (g, split) = (&data.observed, &data.train);
    let (_, grads) = loss_and_grad(model, g, split).unwrap();
    let base = model.params();
    let mut probe = model.clone();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (k, &a) in grads.iter().enumerate() {
        let mut p = base.clone();
        p[k] = base[k] + h;
        probe.set_params(&p).unwrap();
        let up = loss_and_grad(&probe, g, split).unwrap().0;
        p[k] = base[k] - h;
        probe.set_params(&p).unwrap();
        let down = loss_and_grad(&probe, g, split).unwrap().0;
        let f = (up - down) / (2.0 * h);
        worst = worst.max((a - f).abs() / a.abs().max(f.abs()).max(1e-5));
    }
    worst
}

fn net_gradient_error(mpnn: &Mpnn, seed: u64) -> f64 {
    let mut r = rng::stream(seed, "gradcheck");
    let mut worst: f64 = 0.0;
    for net in mpnn.nets() {
        for _ in 0..5 {
            let x: Vec<f64> = (0..net.input_dim()).map(|_| r.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..net.output_dim()).map(|_| r.random_range(-1.0..1.0)).collect();
            worst = worst.max(gradient_check(net, &x, &g, 1e-6).unwrap());
        }
    }
    worst
}

fn gradients() -> Outcome {
    let mut worst: f64 = 0.0;
    let node = converge_mpnn(&ConvergeConfig::default()).unwrap();
    let st = stability_cfg();
    let iso = Mpnn::graphsage(
        &st.widths,
        st.hidden,
        graphon_linkpred::mpnn::Aggregation::NeighborAverage,
        st.model_seed,
    )
    .unwrap();
    for (k, m) in [&node, &converge_mpnn(&bound_cfg()).unwrap(), &iso].into_iter().enumerate() {
        worst = worst.max(net_gradient_error(m, k as u64));
    }
    let cfg = TableConfig::default();
    let mut models = 0;
    for run in 0..cfg.runs {
        let seed = rng::derive_seed(cfg.seed, &format!("run-{run}"));
        for method in [Method::Node, Method::PairFixed, Method::PairLearned] {
            let model = fresh_model(&cfg, method, &cfg.head_hidden, seed).unwrap();
            worst = worst.max(net_gradient_error(model.mpnn(), seed));
            if run < 2 {
                worst = worst.max(model_gradient_error(&model, seed));
                models += 1;
            }
        }
    }
    Outcome {
        pass: worst < 1e-4,
        detail: format!(
            "backbone nets of every run plus {models} end-to-end models, max rel err {worst:.2e} (< 1e-4)"
        ),
        csv: Vec::new(),
    }
}

type Criterion = (usize, &'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let node = || slope_check(&ConvergeConfig::default(), "node_convergence");
    let pair = || {
        slope_check(
            &ConvergeConfig {
                mode: SweepMode::PairFixed,
                ..ConvergeConfig::default()
            },
            "pair_convergence",
        )
    };
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 8] = [
        (1, "pairwise stationarity", stationarity, secs(1)),
        (2, "brute-force equivalence", brute_force, secs(10)),
        (3, "node convergence slope", node, secs(300)),
        (4, "pairwise convergence slope", pair, secs(600)),
        (5, "bound validity frequency", bound_validity, secs(180)),
        (6, "iso-block collapse", iso_collapse, secs(180)),
        (7, "desk-scale link prediction table", desk_table, secs(1800)),
        (8, "gradient correctness", gradients, None),
    ];
    let mut all_ok = true;
    let mut first_csv = Vec::new();
    let mut report = |id: usize, name: &str, pass: bool, detail: &str, took: Duration| {
        all_ok &= pass;
        println!(
            "criterion {id} {}: {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    };
    for (id, name, f, limit) in &criteria {
        let t = Instant::now();
        let out = f();
        let took = t.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let detail = match limit {
            Some(l) if !in_time => format!("{}; over the {} s limit", out.detail, l.as_secs()),
            _ => out.detail.clone(),
        };
        report(*id, name, out.pass && in_time, &detail, took);
        if *id <= 7 {
            first_csv.push(out.csv);
        }
    }

    let t = Instant::now();
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for ((_, _, f, _), before) in criteria.iter().take(7).zip(&first_csv) {
        let again = f().csv;
        for ((name, a), (_, b)) in before.iter().zip(&again) {
            compared += 1;
            if a.as_bytes() != b.as_bytes() {
                mismatched.push(name.clone());
            }
        }
    }
    let detail = if mismatched.is_empty() {
        format!("{compared} outputs byte-identical on rerun")
    } else {
        format!("differing outputs: {}", mismatched.join(", "))
    };
    report(9, "determinism", mismatched.is_empty(), &detail, t.elapsed());

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
