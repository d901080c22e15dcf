use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphon-lp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn run_into(cmd: &str, config: &str, out: &Path) {
    let o = cli(&[cmd, config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{cmd} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn same_files(a: &Path, b: &Path, names: &[&str]) {
    for f in names {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

/// Runs a config twice, then once more from the first run's manifest, and
/// checks all three agree on `files`.
fn reproducible(cmd: &str, config: &str, files: &[&str]) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", config);
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    run_into(cmd, &cfg, &a);
    run_into(cmd, &cfg, &b);
    same_files(&a, &b, files);
    run_into(cmd, a.join("manifest.toml").to_str().unwrap(), &c);
    same_files(&a, &c, files);
}

#[test]
fn sample_is_byte_identical() {
    reproducible("sample", "[sample]\nn = 200\nseed = 11\n", &["edges.txt", "blocks.txt"]);
}

#[test]
fn converge_reruns_from_manifest() {
    let cfg = "[converge]\nn = [32, 64, 128]\nseeds = [0, 1]\nwidths = [1, 3]\nhidden = 4\n";
    reproducible("converge", cfg, &["converge.csv", "summary.jsonl"]);
    let fixed = "[converge]\nmode = \"pair_fixed\"\nn = [32, 64, 128]\nseeds = [0]\n";
    reproducible("converge", fixed, &["converge.csv", "summary.jsonl"]);
}

#[test]
fn stability_reruns_from_manifest() {
    let cfg = "[stability]\nn = [64, 128]\nseeds = [0, 1]\nbudget = 50\n";
    reproducible("stability", cfg, &["stability.csv", "summary.jsonl"]);
}

#[test]
fn table_reruns_from_manifest() {
    let cfg = "[table]\nn_tr = 150\nn_te = 300\nruns = 2\nepochs = 5\nlearn_epochs = 3\nks = [5]\n";
    reproducible("table", cfg, &["table.csv", "table.txt", "runs.jsonl"]);
}

#[test]
fn manifest_records_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "[sample]\nn = 30\nseed = 2\n");
    run_into("sample", &cfg, &tmp.path().join("out"));
    let m: toml::Table = fs::read_to_string(tmp.path().join("out/manifest.toml")).unwrap().parse().unwrap();
    let meta = m["manifest"].as_table().unwrap();
    assert_eq!(meta["command"].as_str(), Some("sample"));
    let files = meta["files"].as_table().unwrap();
    assert!(files.contains_key("edges.txt") && files.contains_key("blocks.txt"));
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();

    let missing = write(tmp.path(), "missing.toml", "[sbm]\nspec = \"nope.toml\"\n[sample]\nn = 5\nseed = 0\n");
    let o = cli(&["sample", &missing, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.toml"));

    let zero = write(tmp.path(), "zero.toml", "[sample]\nn = 0\nseed = 0\n");
    assert_eq!(cli(&["sample", &zero, "--out", out]).status.code(), Some(3));

    let bogus = write(tmp.path(), "bogus.toml", "[sample]\nn = 5\nseed = 0\nwhatever = 1\n");
    assert_eq!(cli(&["sample", &bogus, "--out", out]).status.code(), Some(2));

    assert_eq!(cli(&["sample", "/definitely/not/here.toml"]).status.code(), Some(2));
}

#[test]
fn validate_spec_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write(
        tmp.path(),
        "good.toml",
        "r = 3\nblock_mass = [0.45, 0.1, 0.45]\nS = [0.55, 0.05, 0.02, 0.05, 0.55, 0.05, 0.02, 0.05, 0.55]\nB = [1.0, 1.0, 1.0]\n",
    );
    let o = cli(&["validate-spec", &good]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("blocks: 3"));
    assert!(text.contains("isomorphic blocks: [(0, 2)]"));

    let bad = write(
        tmp.path(),
        "bad.toml",
        "r = 2\nblock_mass = [0.7, 0.7]\nS = [0.5, 0.1, 0.2, 1.5]\nB = [1.0, 1.0]\n",
    );
    let o = cli(&["validate-spec", &bad]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("sum") && err.contains("symmetric"), "{err}");
}
