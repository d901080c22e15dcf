//! Drive a run from a TOML config, as the command-line tool does, and
//! rerun it from the manifest it writes.
//!
//! ```bash
//! cargo run --release --example config_run
//! ```

use std::fs;
use std::path::Path;

use graphon_linkpred::experiment::{load_config, parse_config, run, Command, MANIFEST_FILE};

const CONFIG: &str = r#"
[sbm]
preset = "reference"

[converge]
mode = "pair_fixed"
n = [64, 128, 256, 512]
seeds = [0, 1, 2]
"#;

fn main() -> graphon_linkpred::Result<()> {
    let root = std::env::temp_dir().join("graphon-lp-config-run");
    let cfg = parse_config(CONFIG)?;
    let first = run(Command::Converge, &cfg, Path::new("."), Some(&root.join("first")))?;
    println!("wrote {:?} to {}", first.files, first.dir.display());
    print!("{}", fs::read_to_string(first.dir.join("summary.jsonl")).unwrap_or_default());

    let (again, base) = load_config(first.dir.join(MANIFEST_FILE))?;
    let second = run(Command::Converge, &again, &base, Some(&root.join("second")))?;
    let same = fs::read(first.dir.join("converge.csv")).ok() == fs::read(second.dir.join("converge.csv")).ok();
    println!("rerun from manifest identical: {same}");
    Ok(())
}
