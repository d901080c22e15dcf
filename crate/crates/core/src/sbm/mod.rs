//! Stochastic block models: specification, validation, exact graphon
//! statistics, and seeded sampling.

mod graph;
mod io;
mod spec;

pub(crate) use spec::sorted_sum;

pub use graph::{degree_stats, graph_stats, sample_graph, GraphStats, SampledGraph};
pub use io::{block_column, edge_list, parse_spec, read_spec, spec_to_string, write_graph, write_spec};
pub use spec::SpecRecord;
pub use spec::{
    graphon_common_neighbors, graphon_degree, iso_classes, isomorphic_block_pairs, validate_sbm,
    SbmSpec, ValidationReport, DEFAULT_ISO_TOL,
};
