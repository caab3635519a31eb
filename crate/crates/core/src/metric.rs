//! The MST compactness score.
//!
//! A heatmap is reduced to its salient pixels, which are connected into a
//! kNN graph. Two quantities are read off that structure:
//!
//! * spread, `q_spread = 1 / sqrt(A_hull)`, from the convex hull area;
//! * cohesion, `q_cohesion = |V| / L_T`, from the minimum spanning tree length.
//!
//! The raw score is their product. On the pixel lattice the nearest distinct
//! points are 1 apart and the smallest non-degenerate hull has area 1/2, which
//! gives `q_spread <= sqrt(2)`, `q_cohesion <= 2` and a raw score of at most
//! `2 * sqrt(2)`. When the hull is degenerate (fewer than three points or all
//! collinear) `sqrt(A_hull)` is replaced by the map diagonal `sqrt(h^2 + w^2)`.

use std::f64::consts::SQRT_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attribution::{absolute, AttributionMap};
use crate::error::{MstcError, Result};
use crate::graph::{build_knn_graph, connected_components, SpatialGraph};
use crate::hull::{convex_hull, ConvexHull};
use crate::mst::{minimum_spanning_tree, SpanningTree};
use crate::threshold::{percentile_threshold, validate_percentile, SalientPointSet};

/// How the raw product is scaled into the reported score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// `C = sqrt(h^2 + w^2)`.
    PaperDiag,
    /// `C = 100 * sqrt(h^2 + w^2)`.
    #[default]
    PaperDiagX100,
    /// `C = 1`.
    None,
}

impl ScaleMode {
    pub fn constant(self, height: usize, width: usize) -> f64 {
        let diag = diagonal(height, width);
        match self {
            ScaleMode::PaperDiag => diag,
            ScaleMode::PaperDiagX100 => 100.0 * diag,
            ScaleMode::None => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScaleMode::PaperDiag => "paper_diag",
            ScaleMode::PaperDiagX100 => "paper_diag_x100",
            ScaleMode::None => "none",
        }
    }
}

impl FromStr for ScaleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper_diag" => Ok(Self::PaperDiag),
            "paper_diag_x100" => Ok(Self::PaperDiagX100),
            "none" => Ok(Self::None),
            other => Err(format!("unknown scale mode '{other}'")),
        }
    }
}

/// What to do when the kNN graph has more than one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnDisconnect {
    #[default]
    Error,
    /// Double k until the graph is connected (at the latest at `|V| - 1`).
    EscalateK,
}

impl OnDisconnect {
    pub fn as_str(self) -> &'static str {
        match self {
            OnDisconnect::Error => "error",
            OnDisconnect::EscalateK => "escalate_k",
        }
    }
}

impl FromStr for OnDisconnect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "error" => Ok(Self::Error),
            "escalate_k" => Ok(Self::EscalateK),
            other => Err(format!("unknown disconnect policy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub k: usize,
    pub percentile: f64,
    pub scale_mode: ScaleMode,
    pub on_disconnect: OnDisconnect,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            k: 500,
            percentile: 80.0,
            scale_mode: ScaleMode::default(),
            on_disconnect: OnDisconnect::default(),
        }
    }
}

impl MetricConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_percentile(mut self, percentile: f64) -> Self {
        self.percentile = percentile;
        self
    }

    pub fn with_scale_mode(mut self, scale_mode: ScaleMode) -> Self {
        self.scale_mode = scale_mode;
        self
    }

    pub fn with_on_disconnect(mut self, on_disconnect: OnDisconnect) -> Self {
        self.on_disconnect = on_disconnect;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_percentile(self.percentile)?;
        if self.k == 0 {
            return Err(MstcError::InvalidSpec("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Every intermediate quantity of one score, plus the configuration used.
/// Serializes as a flat JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessReport {
    pub height: usize,
    pub width: usize,
    pub n_nodes: usize,
    pub mst_length: f64,
    pub hull_area: f64,
    pub hull_degenerate: bool,
    pub q_spread: f64,
    pub q_cohesion: f64,
    pub mstc_raw: f64,
    pub mstc_scaled: f64,
    pub scale_constant: f64,
    /// Components of the graph built at the configured k.
    pub components_before: usize,
    pub k_effective: usize,
    #[serde(flatten)]
    pub config: MetricConfig,
}

pub fn diagonal(height: usize, width: usize) -> f64 {
    let (h, w) = (height as f64, width as f64);
    (h * h + w * w).sqrt()
}

pub fn q_spread(hull: &ConvexHull, source_height: usize, source_width: usize) -> Result<f64> {
    if source_height == 0 || source_width == 0 {
        return Err(MstcError::InvalidDimensions {
            height: source_height,
            width: source_width,
        });
    }
    if hull.degenerate {
        return Ok(1.0 / diagonal(source_height, source_width));
    }
    if !(hull.area > 0.0) {
        return Err(MstcError::NonPositiveArea(hull.area));
    }
    Ok(1.0 / hull.area.sqrt())
}

pub fn q_cohesion(n_nodes: usize, mst_length: f64) -> Result<f64> {
    if n_nodes < 2 {
        return Err(MstcError::TooFewNodes(n_nodes));
    }
    if !(mst_length > 0.0) || !mst_length.is_finite() {
        return Err(MstcError::ZeroLength(mst_length));
    }
    Ok(n_nodes as f64 / mst_length)
}

/// All artifacts of one scoring run, for callers that export the graph or
/// tree alongside the report.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: CompactnessReport,
    pub salient: SalientPointSet,
    pub graph: SpatialGraph,
    pub tree: SpanningTree,
    pub hull: ConvexHull,
}

pub fn compute_mstc(map: &AttributionMap, config: &MetricConfig) -> Result<CompactnessReport> {
    analyze(map, config).map(|a| a.report)
}

/// absolute -> percentile threshold -> kNN graph -> connectivity policy ->
/// MST and hull -> spread * cohesion -> scale.
pub fn analyze(map: &AttributionMap, config: &MetricConfig) -> Result<Analysis> {
    config.validate()?;
    let salient = percentile_threshold(&absolute(map), config.percentile)?;
    let n = salient.len();
    if n < 2 {
        return Err(MstcError::TooFewNodes(n));
    }

    let mut graph = build_knn_graph(&salient, config.k)?;
    let (mut components, _) = connected_components(&graph);
    let components_before = components;
    while components > 1 {
        match config.on_disconnect {
            OnDisconnect::Error => {
                return Err(MstcError::DisconnectedGraph {
                    components,
                    k: graph.k_effective,
                })
            }
            OnDisconnect::EscalateK => {
                let next = graph.k_effective.saturating_mul(2).min(n - 1);
                graph = build_knn_graph(&salient, next)?;
                components = connected_components(&graph).0;
            }
        }
    }

    let tree = minimum_spanning_tree(&graph)?;
    let hull = convex_hull(&salient.points);
    let (h, w) = (map.height(), map.width());
    let spread = q_spread(&hull, h, w)?;
    let cohesion = q_cohesion(n, tree.total_length)?;
    let raw = spread * cohesion;
    let scale = config.scale_mode.constant(h, w);

    let report = CompactnessReport {
        height: h,
        width: w,
        n_nodes: n,
        mst_length: tree.total_length,
        hull_area: hull.area,
        hull_degenerate: hull.degenerate,
        q_spread: spread,
        q_cohesion: cohesion,
        mstc_raw: raw,
        mstc_scaled: raw * scale,
        scale_constant: scale,
        components_before,
        k_effective: graph.k_effective,
        config: *config,
    };
    Ok(Analysis {
        report,
        salient,
        graph,
        tree,
        hull,
    })
}

const BOUND_SLACK: f64 = 1e-12;

/// Lists every lattice bound the report's raw quantities violate.
///
/// Checked: `1/sqrt(hw) <= q_spread <= sqrt(2)` for a proper hull (a
/// degenerate hull must carry exactly the diagonal fallback),
/// `0 < q_cohesion <= 2`, and `0 < q_spread * q_cohesion <= 2 sqrt(2)` with
/// the product matching the stored raw score. Upper bounds allow a relative
/// slack of 1e-12 for rounding at the extremal configurations.
pub fn bound_violations(report: &CompactnessReport) -> Vec<&'static str> {
    let mut bad = Vec::new();
    let upper = |v: f64, bound: f64| v <= bound * (1.0 + BOUND_SLACK);
    let hw = (report.height * report.width) as f64;

    if report.hull_degenerate {
        if report.q_spread != 1.0 / diagonal(report.height, report.width) {
            bad.push("q_spread != diagonal fallback");
        }
    } else {
        if report.q_spread < 1.0 / hw.sqrt() {
            bad.push("q_spread < 1/sqrt(hw)");
        }
        if !upper(report.q_spread, SQRT_2) {
            bad.push("q_spread > sqrt(2)");
        }
    }
    if !(report.q_cohesion > 0.0) {
        bad.push("q_cohesion <= 0");
    }
    if !upper(report.q_cohesion, 2.0) {
        bad.push("q_cohesion > 2");
    }
    if report.mstc_raw != report.q_spread * report.q_cohesion {
        bad.push("mstc_raw != q_spread * q_cohesion");
    }
    if !(report.mstc_raw > 0.0) {
        bad.push("mstc_raw <= 0");
    }
    if !upper(report.mstc_raw, 2.0 * SQRT_2) {
        bad.push("mstc_raw > 2 sqrt(2)");
    }
    bad
}

pub fn check_bounds(report: &CompactnessReport) -> bool {
    bound_violations(report).is_empty()
}
