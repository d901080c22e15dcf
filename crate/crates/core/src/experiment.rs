//! Config-driven experiment runs behind the `graphon-lp` binary.
//!
//! One TOML file drives one subcommand. Every run writes its outputs plus a
//! `manifest.toml` into the output directory; the manifest is itself a valid
//! config with the model inlined, so running it again reproduces every file.
//!
//! ```toml
//! output = "out/node"
//!
//! [sbm]
//! preset = "reference"       # or: spec = "model.toml", or inline r/block_mass/S/B
//!
//! [converge]
//! mode = "node_mean"
//! n = [32, 64, 128, 256]
//! seeds = [0, 1, 2, 3, 4]
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::analysis::{
    bound_constants, convergence_sweep, default_p, iso_gap_stats, loglog_slope, medians_by_n,
    summarize, sweep_graph_seed, BoundMode, BoundReport, NodeInit, SweepMode,
};
use crate::error::{Error, Result};
use crate::linkpred::{run_table, TableConfig};
use crate::mpnn::{fixed_psi_mpnn, Aggregation, Mpnn};
use crate::node_mpnn::{degree_signal, gmpnn_node};
use crate::rng::derive_seed;
use crate::sbm::{
    block_column, degree_stats, edge_list, isomorphic_block_pairs, read_spec, sample_graph,
    validate_sbm, SbmSpec, SpecRecord, DEFAULT_ISO_TOL,
};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Reference,
    ReferenceLinkPrediction,
}

/// Where the SBM comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SbmSource {
    Preset { preset: Preset },
    File { spec: PathBuf },
    Inline(SpecRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub mode: SweepMode,
    /// Graph sizes; defaults to `2^5..2^12` for node modes, `2^5..2^11` for pairwise.
    pub n: Option<Vec<usize>>,
    pub seeds: Vec<u64>,
    pub model_seed: u64,
    /// Layer widths `[F_0, ..., F_T]` of the network (not used by `pair_fixed`).
    pub widths: Vec<usize>,
    pub hidden: usize,
    /// Depth of the `pair_fixed` network.
    pub depth: usize,
    pub init: NodeInit,
    /// Failure probability of the bound; defaults to a 99% guarantee.
    pub p: Option<f64>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            mode: SweepMode::NodeMean,
            n: None,
            seeds: (0..5).collect(),
            model_seed: 0,
            widths: vec![1, 10, 10],
            hidden: 10,
            depth: 2,
            init: NodeInit::Degree,
            p: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub n: Vec<usize>,
    pub seeds: Vec<u64>,
    pub model_seed: u64,
    pub widths: Vec<usize>,
    pub hidden: usize,
    /// Node pairs sampled per category and graph.
    pub budget: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            n: vec![512, 1024, 2048, 4096],
            seeds: (0..5).collect(),
            model_seed: 0,
            widths: vec![1, 10, 10],
            hidden: 10,
            budget: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output: Option<PathBuf>,
    pub sbm: Option<SbmSource>,
    pub sample: Option<SampleConfig>,
    pub converge: Option<ConvergeConfig>,
    pub stability: Option<StabilityConfig>,
    pub table: Option<TableConfig>,
    /// Present in manifests; ignored on input.
    pub manifest: Option<toml::Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sample,
    Converge,
    Stability,
    Table,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Converge => "converge",
            Command::Stability => "stability",
            Command::Table => "table",
        }
    }
}

/// Files written by a run, relative to its output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Read a config; relative paths inside it resolve against its directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<(RunConfig, PathBuf)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = parse_config(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// The SBM a config refers to, defaulting to the reference model for `command`.
pub fn resolve_spec(cfg: &RunConfig, base: &Path, command: Command) -> Result<SbmSpec> {
    match &cfg.sbm {
        None if command == Command::Table => Ok(SbmSpec::reference_link_prediction()),
        None => Ok(SbmSpec::reference()),
        Some(SbmSource::Preset { preset: Preset::Reference }) => Ok(SbmSpec::reference()),
        Some(SbmSource::Preset {
            preset: Preset::ReferenceLinkPrediction,
        }) => Ok(SbmSpec::reference_link_prediction()),
        Some(SbmSource::File { spec }) => read_spec(resolve(base, spec)),
        Some(SbmSource::Inline(rec)) => rec.clone().into_spec(),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<(String, String)>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    files.push((name.to_string(), sha256_hex(contents.as_bytes())));
    Ok(())
}

/// Run `command` from `cfg`. `out` overrides the configured output directory.
pub fn run(command: Command, cfg: &RunConfig, base: &Path, out: Option<&Path>) -> Result<RunOutput> {
    let spec = resolve_spec(cfg, base, command)?;
    let dir = match (out, &cfg.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => resolve(base, o),
        (None, None) => {
            return Err(Error::Config(
                "no output directory: set `output` or pass --out".into(),
            ))
        }
    };

    // the resolved config, which the manifest records verbatim
    let mut resolved = RunConfig {
        output: Some(dir.clone()),
        sbm: Some(SbmSource::Inline(SpecRecord::from_spec(&spec))),
        sample: None,
        converge: None,
        stability: None,
        table: None,
        manifest: None,
    };
    let missing = |name: &str| Error::Config(format!("config has no [{name}] section"));
    match command {
        Command::Sample => resolved.sample = Some(cfg.sample.clone().ok_or_else(|| missing("sample"))?),
        Command::Converge => resolved.converge = Some(cfg.converge.clone().unwrap_or_default()),
        Command::Stability => resolved.stability = Some(cfg.stability.clone().unwrap_or_default()),
        Command::Table => resolved.table = Some(cfg.table.clone().unwrap_or_default()),
    }

    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut files = Vec::new();
    match command {
        Command::Sample => {
            let sc = resolved.sample.as_ref().expect("set above");
            let g = sample_graph(&spec, sc.n, sc.seed)?;
            write_file(&dir, "edges.txt", &edge_list(&g), &mut files)?;
            write_file(&dir, "blocks.txt", &block_column(&g), &mut files)?;
        }
        Command::Converge => {
            let (csv, summary) = converge(&spec, resolved.converge.as_ref().expect("set above"))?;
            write_file(&dir, "converge.csv", &csv, &mut files)?;
            write_file(&dir, "summary.jsonl", &summary, &mut files)?;
        }
        Command::Stability => {
            let (csv, summary) = stability(&spec, resolved.stability.as_ref().expect("set above"))?;
            write_file(&dir, "stability.csv", &csv, &mut files)?;
            write_file(&dir, "summary.jsonl", &summary, &mut files)?;
        }
        Command::Table => {
            let table = run_table(&spec, resolved.table.as_ref().expect("set above"))?;
            write_file(&dir, "table.csv", &table.to_csv(), &mut files)?;
            write_file(&dir, "table.txt", &table.to_text(), &mut files)?;
            let mut runs = String::new();
            for r in &table.records {
                let line = serde_json::to_string(r).map_err(|e| Error::Numerical(e.to_string()))?;
                let _ = writeln!(runs, "{line}");
            }
            write_file(&dir, "runs.jsonl", &runs, &mut files)?;
        }
    }

    let body = toml::to_string(&resolved).map_err(|e| Error::Config(e.to_string()))?;
    let mut manifest = toml::Table::new();
    manifest.insert("command".into(), command.name().into());
    manifest.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    manifest.insert("config_sha256".into(), sha256_hex(body.as_bytes()).into());
    let mut hashes = toml::Table::new();
    for (name, h) in &files {
        hashes.insert(name.clone(), h.clone().into());
    }
    manifest.insert("files".into(), hashes.into());
    resolved.manifest = Some(manifest);
    let text = toml::to_string(&resolved).map_err(|e| Error::Config(e.to_string()))?;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;

    let mut names: Vec<String> = files.into_iter().map(|f| f.0).collect();
    names.push(MANIFEST_FILE.into());
    Ok(RunOutput { dir, files: names })
}

/// The network a convergence sweep runs.
pub fn converge_mpnn(cfg: &ConvergeConfig) -> Result<Mpnn> {
    match cfg.mode {
        SweepMode::NodeMean => Mpnn::graphsage(&cfg.widths, cfg.hidden, Aggregation::NeighborAverage, cfg.model_seed),
        SweepMode::NodeSum => Mpnn::graphsage(&cfg.widths, cfg.hidden, Aggregation::NormalizedSum, cfg.model_seed),
        SweepMode::PairFixed => fixed_psi_mpnn(cfg.depth),
        SweepMode::PairNet => Mpnn::pair_learned(&cfg.widths, cfg.hidden, cfg.model_seed),
    }
}

pub fn default_sizes(mode: SweepMode) -> Vec<usize> {
    let top = if mode.is_pair() { 11 } else { 12 };
    (5..=top).map(|e| 1usize << e).collect()
}

/// Bound constants for a sweep, when the network admits them.
pub fn sweep_bound(spec: &SbmSpec, mpnn: &Mpnn, cfg: &ConvergeConfig, n: usize) -> Result<Option<BoundReport>> {
    let mode = match cfg.mode {
        SweepMode::NodeMean => BoundMode::NodeMean,
        SweepMode::NodeSum => BoundMode::NodeSum,
        SweepMode::PairNet => BoundMode::Pair,
        SweepMode::PairFixed => return Ok(None),
    };
    let f_inf = match (cfg.mode.is_pair(), cfg.init) {
        (true, _) => 1.0,
        (false, NodeInit::Degree) => degree_signal(spec).fold(0.0f64, |m, v| m.max(v.abs())),
        (false, NodeInit::Signal) => spec.b.fold(0.0f64, |m, v| m.max(v.abs())),
    };
    let p = cfg.p.unwrap_or_else(|| default_p(mpnn));
    bound_constants(mpnn, f_inf, spec, p, mode, n).map(Some)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `converge.csv` and `summary.jsonl` contents.
pub fn converge(spec: &SbmSpec, cfg: &ConvergeConfig) -> Result<(String, String)> {
    let mpnn = converge_mpnn(cfg)?;
    let sizes = cfg.n.clone().unwrap_or_else(|| default_sizes(cfg.mode));
    if let Some(&bad) = sizes.iter().find(|&&n| n < 2) {
        return Err(Error::Precondition(format!("graph size {bad} is below 2")));
    }
    let records = convergence_sweep(spec, &mpnn, cfg.mode, cfg.init, &sizes, &cfg.seeds)?;
    let bound = sweep_bound(spec, &mpnn, cfg, sizes[0])?;

    let mut csv = String::from("mode,n,seed,delta,bound\n");
    let mut covered = 0;
    for r in &records {
        let b = bound.as_ref().map(|rep| rep.bound_at(r.n));
        if b.is_some_and(|b| r.delta <= b) {
            covered += 1;
        }
        let _ = writeln!(csv, "{},{},{},{},{}", r.mode.name(), r.n, r.seed, r.delta, fmt_opt(b));
    }

    let mut summary = String::new();
    let distinct: BTreeSet<usize> = sizes.iter().copied().collect();
    if distinct.len() >= 3 {
        let fit = loglog_slope(&records)?;
        let line = json!({
            "kind": "fit",
            "mode": cfg.mode.name(),
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r2": fit.r2,
        });
        let _ = writeln!(summary, "{line}");
    }
    for (n, d) in medians_by_n(&records) {
        let _ = writeln!(summary, "{}", json!({"kind": "median", "n": n, "median_delta": d}));
    }
    let line = match &bound {
        Some(rep) => json!({
            "kind": "bound",
            "p": rep.p,
            "c1": rep.c1,
            "c2": rep.c2,
            "f_inf_norm": rep.f_inf_norm,
            "confidence": rep.confidence,
            "bound_validity": covered as f64 / records.len() as f64,
        }),
        None => json!({"kind": "bound", "bound_validity": null}),
    };
    let _ = writeln!(summary, "{line}");
    Ok((csv, summary))
}

/// `stability.csv` (one row per sampled gap) and `summary.jsonl` (medians per size).
pub fn stability(spec: &SbmSpec, cfg: &StabilityConfig) -> Result<(String, String)> {
    let iso = isomorphic_block_pairs(spec, DEFAULT_ISO_TOL);
    let mpnn = Mpnn::graphsage(&cfg.widths, cfg.hidden, Aggregation::NeighborAverage, cfg.model_seed)?;
    let mut csv = String::from("n,seed,kind,gap\n");
    let mut summary = String::new();
    for &n in &cfg.n {
        let (mut iso_all, mut non_all) = (Vec::new(), Vec::new());
        for &seed in &cfg.seeds {
            let g = sample_graph(spec, n, sweep_graph_seed(seed, n))?.with_degree_features();
            let emb = gmpnn_node(&g, &degree_stats(&g), &mpnn)?;
            let st = iso_gap_stats(&emb, &g, &iso, cfg.budget, derive_seed(seed, "stability"))?;
            for (kind, gaps) in [("iso", &st.iso), ("non_iso", &st.non_iso)] {
                for v in gaps {
                    let _ = writeln!(csv, "{n},{seed},{kind},{v}");
                }
            }
            iso_all.extend(st.iso);
            non_all.extend(st.non_iso);
        }
        let (a, b) = (summarize(&iso_all), summarize(&non_all));
        let line = json!({
            "n": n,
            "iso_median": a.median,
            "iso_q90": a.q90,
            "non_iso_median": b.median,
            "non_iso_q10": b.q10,
            "pairs": a.count + b.count,
        });
        let _ = writeln!(summary, "{line}");
    }
    Ok((csv, summary))
}

/// Human-readable validation report for a spec file or a config's `[sbm]`.
pub fn validate_spec_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec = match crate::sbm::parse_spec(&text) {
        Ok(s) => s,
        Err(Error::Config(_)) => {
            let cfg = parse_config(&text)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            resolve_spec(&cfg, &base, Command::Converge)?
        }
        Err(e) => return Err(e),
    };
    let rep = validate_sbm(&spec)?;
    let iso = isomorphic_block_pairs(&spec, DEFAULT_ISO_TOL);
    let mut s = String::new();
    let _ = writeln!(s, "blocks: {}", spec.r());
    let _ = writeln!(s, "d_min: {}", rep.d_min);
    let _ = writeln!(s, "d_cmin: {}", rep.d_cmin);
    let _ = writeln!(s, "node use: {}", if rep.node_ok { "ok" } else { "no (d_min = 0)" });
    let _ = writeln!(s, "pair use: {}", if rep.pair_ok { "ok" } else { "no (d_cmin = 0)" });
    let pairs: Vec<String> = iso.iter().map(|(a, b)| format!("({a}, {b})")).collect();
    let _ = writeln!(s, "isomorphic blocks: [{}]", pairs.join(", "));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_parse() {
        let c = parse_config("[sbm]\npreset = \"reference\"\n").unwrap();
        assert_eq!(c.sbm, Some(SbmSource::Preset { preset: Preset::Reference }));
        let c = parse_config("[sbm]\nspec = \"m.toml\"\n").unwrap();
        assert!(matches!(c.sbm, Some(SbmSource::File { .. })));
        let c = parse_config("[sbm]\nr = 1\nblock_mass = [1.0]\nS = [0.4]\nB = [1.0]\n").unwrap();
        let spec = resolve_spec(&c, Path::new("."), Command::Sample).unwrap();
        assert_eq!(spec.s[[0, 0]], 0.4);
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("[converge]\nmode = \"sideways\"").is_err());
    }

    #[test]
    fn defaults_per_command() {
        let c = parse_config("").unwrap();
        assert_eq!(resolve_spec(&c, Path::new("."), Command::Table).unwrap(), SbmSpec::reference_link_prediction());
        assert_eq!(resolve_spec(&c, Path::new("."), Command::Converge).unwrap(), SbmSpec::reference());
        assert_eq!(default_sizes(SweepMode::NodeMean).last(), Some(&4096));
        assert_eq!(default_sizes(SweepMode::PairFixed), vec![32, 64, 128, 256, 512, 1024, 2048]);
    }

    #[test]
    fn converge_outputs() {
        let cfg = ConvergeConfig {
            n: Some(vec![32, 64, 128]),
            seeds: vec![0, 1],
            widths: vec![1, 4],
            hidden: 4,
            ..ConvergeConfig::default()
        };
        let (csv, summary) = converge(&SbmSpec::reference(), &cfg).unwrap();
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.lines().nth(1).unwrap().starts_with("node_mean,32,0,"));
        let first: serde_json::Value = serde_json::from_str(summary.lines().next().unwrap()).unwrap();
        assert_eq!(first["kind"], "fit");
        assert!(first["slope"].is_f64());
        let last: serde_json::Value = serde_json::from_str(summary.lines().last().unwrap()).unwrap();
        assert!(last["bound_validity"].as_f64().unwrap() >= 0.0);

        let fixed = ConvergeConfig {
            mode: SweepMode::PairFixed,
            n: Some(vec![32, 48, 64]),
            seeds: vec![0],
            ..ConvergeConfig::default()
        };
        let (csv, summary) = converge(&SbmSpec::reference(), &fixed).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
        assert!(summary.contains("\"bound_validity\":null"));

        let single = ConvergeConfig { n: Some(vec![64]), ..cfg };
        let (_, summary) = converge(&SbmSpec::reference(), &single).unwrap();
        assert!(!summary.contains("\"fit\""));
        assert!(summary.contains("bound_validity"));
    }

    #[test]
    fn stability_rows() {
        let cfg = StabilityConfig {
            n: vec![64],
            seeds: vec![0],
            budget: 10,
            widths: vec![1, 3],
            hidden: 3,
            ..StabilityConfig::default()
        };
        let (csv, summary) = stability(&SbmSpec::reference(), &cfg).unwrap();
        assert_eq!(csv.lines().count(), 1 + 20);
        assert_eq!(summary.lines().count(), 1);
    }

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config("[sample]\nn = 50\nseed = 3\n").unwrap();
        let out = run(Command::Sample, &cfg, Path::new("."), Some(dir.path())).unwrap();
        assert_eq!(out.files, vec!["edges.txt", "blocks.txt", MANIFEST_FILE]);
        let (m, base) = load_config(dir.path().join(MANIFEST_FILE)).unwrap();
        let table = m.manifest.as_ref().unwrap();
        assert_eq!(table["command"].as_str(), Some("sample"));
        let again = tempfile::tempdir().unwrap();
        run(Command::Sample, &m, &base, Some(again.path())).unwrap();
        for f in ["edges.txt", "blocks.txt"] {
            assert_eq!(
                fs::read(dir.path().join(f)).unwrap(),
                fs::read(again.path().join(f)).unwrap()
            );
        }
    }

    #[test]
    fn missing_pieces() {
        let cfg = parse_config("[sample]\nn = 50\nseed = 3\n").unwrap();
        assert!(matches!(run(Command::Sample, &cfg, Path::new("."), None), Err(Error::Config(_))));
        let dir = tempfile::tempdir().unwrap();
        let empty = parse_config("").unwrap();
        assert!(matches!(
            run(Command::Sample, &empty, Path::new("."), Some(dir.path())),
            Err(Error::Config(_))
        ));
        let gone = parse_config("[sbm]\nspec = \"nope.toml\"\n[sample]\nn = 5\nseed = 0\n").unwrap();
        let err = run(Command::Sample, &gone, dir.path(), Some(dir.path())).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
