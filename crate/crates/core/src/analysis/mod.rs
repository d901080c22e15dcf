//! Measurements relating discrete and continuous embeddings.

mod bounds;
mod delta;
mod iso;
mod slope;
mod sweep;

pub use bounds::{
    bound_constants, default_p, layer_constants, rate, BoundMode, BoundReport, LayerBound,
};
pub use delta::{delta_node, delta_pair, delta_pair_offdiag};
pub use iso::{iso_gap_stats, summarize, GapSummary, IsoGapStats};
pub use slope::{least_squares, loglog_slope, median, medians_by_n, SlopeFit};
pub use sweep::{convergence_sweep, sweep_graph_seed, ConvergenceRecord, NodeInit, SweepMode};
