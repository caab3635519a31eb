//! Structural compactness of 2D attribution heatmaps.
//!
//! The salient pixels of a heatmap are connected into a Euclidean kNN graph;
//! its minimum spanning tree length (cohesion) and the area of the points'
//! convex hull (spread) combine into a single compactness score. The crate
//! also provides global-statistics baselines, synthetic heatmap families and
//! a batch harness for hyperparameter and resolution sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attribution;
pub mod baseline;
pub mod error;
pub mod formats;
pub mod graph;
pub mod harness;
pub mod hull;
pub mod metric;
pub mod mst;
pub mod synth;
pub mod threshold;
pub mod union_find;

pub use attribution::{absolute, bilinear_resize, normalize_maxabs, AttributionMap};
pub use baseline::{
    complexity_entropy, effective_complexity, pearson, sparseness_gini, FlatAttribution,
};
pub use error::{MstcError, Result};
pub use formats::{load_map, load_map_auto, save_map, MapFormat};
pub use graph::{build_knn_graph, connected_components, knn_graph, Edge, SpatialGraph};
pub use harness::{
    correlate, parse_manifest, run_batch, BatchResults, ResultRow, RunConfig, Sample, Sweep,
    SweepAxis,
};
pub use hull::{convex_hull, ConvexHull};
pub use metric::{
    analyze, check_bounds, compute_mstc, q_cohesion, q_spread, Analysis, CompactnessReport,
    MetricConfig, OnDisconnect, ScaleMode,
};
pub use mst::{minimum_spanning_tree, SpanningTree};
pub use synth::{generate, SynthKind, SynthSpec};
pub use threshold::{percentile_threshold, Pixel, SalientPointSet};
