use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::graph::SampledGraph;
use super::spec::{SbmSpec, SpecRecord};
use crate::error::{Error, Result};

/// Parse the key-value spec format:
///
/// ```text
/// r = 2
/// block_mass = [0.5, 0.5]
/// S = [0.6, 0.1, 0.1, 0.6]   # row-major
/// B = [1.0, 1.0]             # row-major, r x F0
/// ```
pub fn parse_spec(text: &str) -> Result<SbmSpec> {
    let rec: SpecRecord =
        toml::from_str(text).map_err(|e| Error::Config(format!("bad spec: {e}")))?;
    rec.into_spec()
}

pub fn spec_to_string(spec: &SbmSpec) -> String {
    toml::to_string(&SpecRecord::from_spec(spec)).expect("spec serializes")
}

pub fn read_spec(path: impl AsRef<Path>) -> Result<SbmSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spec(&text)
}

pub fn write_spec(spec: &SbmSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, spec_to_string(spec)).map_err(|e| Error::io(path, e))
}

/// `i j` per line, 0-indexed, `i < j`.
pub fn edge_list(graph: &SampledGraph) -> String {
    let mut s = String::new();
    for (i, j) in graph.edges() {
        writeln!(s, "{i} {j}").unwrap();
    }
    s
}

/// One block index per line, in node order.
pub fn block_column(graph: &SampledGraph) -> String {
    let mut s = String::new();
    for b in &graph.block_of {
        writeln!(s, "{b}").unwrap();
    }
    s
}

/// Write `edges.txt` and `blocks.txt` into `dir`.
pub fn write_graph(graph: &SampledGraph, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let edges = dir.join("edges.txt");
    fs::write(&edges, edge_list(graph)).map_err(|e| Error::io(&edges, e))?;
    let blocks = dir.join("blocks.txt");
    fs::write(&blocks, block_column(graph)).map_err(|e| Error::io(&blocks, e))
}
