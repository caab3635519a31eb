//! Batch scoring, hyperparameter sweeps, correlation tables and plot-ready
//! exports.
//!
//! `results.csv` columns, in order:
//!
//! ```text
//! sample,label,sweep_axis,sweep_value,height,width,n_nodes,k,k_effective,
//! components_before,percentile,scale_mode,on_disconnect,mst_length,hull_area,
//! hull_degenerate,q_spread,q_cohesion,mstc_raw,mstc_scaled,scale_constant,
//! sparseness,complexity,effective_complexity,seconds,error
//! ```
//!
//! Metric columns are empty on rows whose `error` is set. Baselines are
//! computed on the max-abs normalized map after any resize.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{bilinear_resize, normalize_maxabs, AttributionMap};
use crate::baseline::{
    complexity_entropy, effective_complexity, pearson, sparseness_gini, FlatAttribution,
};
use crate::error::{MstcError, Result};
use crate::formats::load_map_auto;
use crate::graph::write_edge_csv;
use crate::metric::{analyze, Analysis, MetricConfig};
use crate::mst::write_dot;
use crate::threshold::validate_percentile;

/// Default magnitude above which an attribution counts toward effective
/// complexity.
pub const DEFAULT_EFFECTIVE_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
pub enum SampleSource {
    File(PathBuf),
    Map(AttributionMap),
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub id: String,
    pub label: String,
    pub source: SampleSource,
}

impl Sample {
    pub fn from_map(id: impl Into<String>, label: impl Into<String>, map: AttributionMap) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            source: SampleSource::Map(map),
        }
    }

    pub fn from_file(path: impl Into<PathBuf>, label: impl Into<String>) -> Self {
        let path = path.into();
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Self {
            id,
            label: label.into(),
            source: SampleSource::File(path),
        }
    }
}

/// Reads a manifest: one `path[,label]` per line, `#` comments and blank
/// lines ignored. Relative paths resolve against the manifest's directory.
pub fn parse_manifest(path: &Path) -> Result<Vec<Sample>> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => MstcError::FileNotFound(path.to_path_buf()),
        _ => MstcError::Io(e),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut samples = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (file, label) = match line.split_once(',') {
            Some((f, l)) => (f.trim(), l.trim()),
            None => (line, ""),
        };
        let file = Path::new(file);
        let file = if file.is_relative() {
            base.join(file)
        } else {
            file.to_path_buf()
        };
        samples.push(Sample::from_file(file, label));
    }
    dedup_ids(&mut samples);
    Ok(samples)
}

/// Makes sample ids unique by suffixing repeats with `_<n>`.
pub fn dedup_ids(samples: &mut [Sample]) {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for s in samples.iter_mut() {
        let count = seen.entry(s.id.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            s.id = format!("{}_{}", s.id, count);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[default]
    None,
    K,
    Percentile,
    /// Square output size; the raw map is resized before any preprocessing.
    Resolution,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::K => "k",
            SweepAxis::Percentile => "percentile",
            SweepAxis::Resolution => "resolution",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Self {
        Self { axis, values }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis == SweepAxis::None {
            return Ok(());
        }
        let bad = |msg: String| Err(MstcError::InvalidSpec(msg));
        if self.values.is_empty() {
            return bad(format!(
                "{} sweep needs at least one value",
                self.axis.as_str()
            ));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("sweep values must be strictly increasing".into());
        }
        for &v in &self.values {
            match self.axis {
                SweepAxis::K | SweepAxis::Resolution => {
                    if !(v >= 1.0 && v.fract() == 0.0) {
                        return bad(format!(
                            "{} must be a positive integer, got {v}",
                            self.axis.as_str()
                        ));
                    }
                }
                SweepAxis::Percentile => validate_percentile(v)?,
                SweepAxis::None => {}
            }
        }
        Ok(())
    }

    /// Sweep points; a single `None` when there is no sweep.
    fn points(&self) -> Vec<Option<f64>> {
        match self.axis {
            SweepAxis::None => vec![None],
            _ => self.values.iter().copied().map(Some).collect(),
        }
    }
}

/// Which per-sample artifacts [`run_batch`] writes into `dir`.
#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub reports: bool,
    pub dot: bool,
    pub edges: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub samples: Vec<Sample>,
    pub metric: MetricConfig,
    pub sweep: Sweep,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    pub effective_eps: f64,
    /// Aggregate per (label, sweep point) instead of per sweep point.
    pub aggregate_by_label: bool,
    pub output: Option<OutputOptions>,
}

impl RunConfig {
    pub fn new(samples: Vec<Sample>, metric: MetricConfig) -> Self {
        Self {
            samples,
            metric,
            sweep: Sweep::none(),
            workers: 0,
            effective_eps: DEFAULT_EFFECTIVE_EPS,
            aggregate_by_label: false,
            output: None,
        }
    }

    pub fn with_sweep(mut self, sweep: Sweep) -> Self {
        self.sweep = sweep;
        self
    }
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultRow {
    pub sample: String,
    pub label: String,
    pub sweep_axis: String,
    pub sweep_value: Option<f64>,
    pub height: Option<usize>,
    pub width: Option<usize>,
    pub n_nodes: Option<usize>,
    pub k: usize,
    pub k_effective: Option<usize>,
    pub components_before: Option<usize>,
    pub percentile: f64,
    pub scale_mode: String,
    pub on_disconnect: String,
    pub mst_length: Option<f64>,
    pub hull_area: Option<f64>,
    pub hull_degenerate: Option<bool>,
    pub q_spread: Option<f64>,
    pub q_cohesion: Option<f64>,
    pub mstc_raw: Option<f64>,
    pub mstc_scaled: Option<f64>,
    pub scale_constant: Option<f64>,
    pub sparseness: Option<f64>,
    pub complexity: Option<f64>,
    pub effective_complexity: Option<usize>,
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

impl ResultRow {
    /// Numeric value of a column by name, if present and numeric.
    pub fn numeric(&self, column: &str) -> Option<f64> {
        match column {
            "sweep_value" => self.sweep_value,
            "height" => self.height.map(|v| v as f64),
            "width" => self.width.map(|v| v as f64),
            "n_nodes" => self.n_nodes.map(|v| v as f64),
            "k" => Some(self.k as f64),
            "k_effective" => self.k_effective.map(|v| v as f64),
            "components_before" => self.components_before.map(|v| v as f64),
            "percentile" => Some(self.percentile),
            "mst_length" => self.mst_length,
            "hull_area" => self.hull_area,
            "q_spread" => self.q_spread,
            "q_cohesion" => self.q_cohesion,
            "mstc_raw" => self.mstc_raw,
            "mstc_scaled" => self.mstc_scaled,
            "scale_constant" => self.scale_constant,
            "sparseness" => self.sparseness,
            "complexity" => self.complexity,
            "effective_complexity" => self.effective_complexity.map(|v| v as f64),
            "seconds" => self.seconds,
            _ => None,
        }
    }

    /// Text value of a grouping column.
    pub fn group_value(&self, column: &str) -> Option<String> {
        match column {
            "sample" => Some(self.sample.clone()),
            "label" => Some(self.label.clone()),
            "sweep_axis" => Some(self.sweep_axis.clone()),
            "scale_mode" => Some(self.scale_mode.clone()),
            other => self.numeric(other).map(|v| format!("{v}")),
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

pub const NUMERIC_COLUMNS: &[&str] = &[
    "sweep_value",
    "height",
    "width",
    "n_nodes",
    "k",
    "k_effective",
    "components_before",
    "percentile",
    "mst_length",
    "hull_area",
    "q_spread",
    "q_cohesion",
    "mstc_raw",
    "mstc_scaled",
    "scale_constant",
    "sparseness",
    "complexity",
    "effective_complexity",
    "seconds",
];

const AGGREGATED: &[&str] = &[
    "n_nodes",
    "k_effective",
    "mst_length",
    "hull_area",
    "q_spread",
    "q_cohesion",
    "mstc_raw",
    "mstc_scaled",
    "sparseness",
    "complexity",
    "effective_complexity",
    "seconds",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub label: String,
    pub sweep_axis: String,
    pub sweep_value: Option<f64>,
    pub count: usize,
    pub failed: usize,
    /// `(column, mean, sample std)` for every aggregated column; std needs
    /// at least two values.
    pub stats: Vec<(&'static str, Option<f64>, Option<f64>)>,
}

impl AggregateRow {
    pub fn mean(&self, column: &str) -> Option<f64> {
        self.stats.iter().find(|s| s.0 == column).and_then(|s| s.1)
    }

    pub fn std(&self, column: &str) -> Option<f64> {
        self.stats.iter().find(|s| s.0 == column).and_then(|s| s.2)
    }
}

#[derive(Debug, Clone)]
pub struct BatchResults {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl BatchResults {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(ResultRow::failed)
    }
}

/// Mean and sample standard deviation (n - 1).
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Scores every sample at every sweep point.
///
/// Per-sample failures land in the `error` column and the run continues.
/// Row order is sample-major and independent of scheduling; only `seconds`
/// varies between runs.
pub fn run_batch(config: &RunConfig) -> Result<BatchResults> {
    config.metric.validate()?;
    config.sweep.validate()?;
    if let Some(out) = &config.output {
        fs::create_dir_all(&out.dir)?;
        if out.reports {
            fs::create_dir_all(out.dir.join("reports"))?;
        }
        if out.dot || out.edges {
            fs::create_dir_all(out.dir.join("overlays"))?;
        }
    }

    let work = || -> Vec<ResultRow> {
        let maps: Vec<std::result::Result<AttributionMap, String>> = config
            .samples
            .par_iter()
            .map(|s| match &s.source {
                SampleSource::Map(m) => Ok(m.clone()),
                SampleSource::File(p) => load_map_auto(p).map_err(|e| error_text(&e)),
            })
            .collect();
        let points = config.sweep.points();
        let tasks: Vec<(usize, Option<f64>)> = (0..config.samples.len())
            .flat_map(|s| points.iter().map(move |&p| (s, p)))
            .collect();
        tasks
            .into_par_iter()
            .map(|(s, point)| score_task(config, &config.samples[s], &maps[s], point))
            .collect()
    };

    let rows = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| MstcError::InvalidSpec(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };

    let aggregates = aggregate(&rows, config.aggregate_by_label);
    if let Some(out) = &config.output {
        write_results_csv(&rows, &out.dir.join("results.csv"))?;
        write_aggregates_csv(&aggregates, &out.dir.join("aggregates.csv"))?;
    }
    Ok(BatchResults { rows, aggregates })
}

fn score_task(
    config: &RunConfig,
    sample: &Sample,
    map: &std::result::Result<AttributionMap, String>,
    point: Option<f64>,
) -> ResultRow {
    let mut metric = config.metric;
    match (config.sweep.axis, point) {
        (SweepAxis::K, Some(v)) => metric.k = v as usize,
        (SweepAxis::Percentile, Some(v)) => metric.percentile = v,
        _ => {}
    }
    let mut row = ResultRow {
        sample: sample.id.clone(),
        label: sample.label.clone(),
        sweep_axis: config.sweep.axis.as_str().to_string(),
        sweep_value: point,
        k: metric.k,
        percentile: metric.percentile,
        scale_mode: metric.scale_mode.as_str().to_string(),
        on_disconnect: metric.on_disconnect.as_str().to_string(),
        ..ResultRow::default()
    };

    let map = match map {
        Ok(m) => m,
        Err(msg) => {
            row.error = Some(msg.clone());
            return row;
        }
    };
    let outcome = (|| -> Result<()> {
        let resized;
        let map = match (config.sweep.axis, point) {
            (SweepAxis::Resolution, Some(v)) => {
                resized = bilinear_resize(map, v as usize, v as usize)?;
                &resized
            }
            _ => map,
        };

        let start = Instant::now();
        let analysis = analyze(map, &metric)?;
        row.seconds = Some(start.elapsed().as_secs_f64());

        let r = &analysis.report;
        row.height = Some(r.height);
        row.width = Some(r.width);
        row.n_nodes = Some(r.n_nodes);
        row.k_effective = Some(r.k_effective);
        row.components_before = Some(r.components_before);
        row.mst_length = Some(r.mst_length);
        row.hull_area = Some(r.hull_area);
        row.hull_degenerate = Some(r.hull_degenerate);
        row.q_spread = Some(r.q_spread);
        row.q_cohesion = Some(r.q_cohesion);
        row.mstc_raw = Some(r.mstc_raw);
        row.mstc_scaled = Some(r.mstc_scaled);
        row.scale_constant = Some(r.scale_constant);

        let flat = FlatAttribution::from(&normalize_maxabs(map));
        row.sparseness = sparseness_gini(&flat).ok();
        row.complexity = complexity_entropy(&flat).ok();
        row.effective_complexity = Some(effective_complexity(&flat, config.effective_eps));

        if let Some(out) = &config.output {
            let stem = artifact_stem(&sample.id, config.sweep.axis, point);
            if out.reports {
                let path = out.dir.join("reports").join(format!("{stem}.json"));
                let json = serde_json::to_string_pretty(&analysis.report)
                    .map_err(|e| MstcError::Format(e.to_string()))?;
                fs::write(path, json)?;
            }
            if out.dot || out.edges {
                export_overlay(
                    &analysis,
                    map,
                    &out.dir.join("overlays"),
                    &stem,
                    out.dot,
                    out.edges,
                )?;
            }
        }
        Ok(())
    })();

    if let Err(e) = outcome {
        row.error = Some(error_text(&e));
    }
    row
}

fn error_text(e: &MstcError) -> String {
    format!("{}: {e}", e.name())
}

fn artifact_stem(id: &str, axis: SweepAxis, point: Option<f64>) -> String {
    match point {
        Some(v) => format!("{id}__{}_{v}", axis.as_str()),
        None => id.to_string(),
    }
}

/// Groups successful rows by sweep point (and label when requested), in
/// order of first appearance.
pub fn aggregate(rows: &[ResultRow], by_label: bool) -> Vec<AggregateRow> {
    let mut order: Vec<(String, Option<u64>)> = Vec::new();
    let mut groups: BTreeMap<(String, Option<u64>), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        let label = if by_label {
            row.label.clone()
        } else {
            String::new()
        };
        let key = (label, row.sweep_value.map(f64::to_bits));
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(row);
    }

    order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let ok: Vec<&&ResultRow> = members.iter().filter(|r| !r.failed()).collect();
            let stats = AGGREGATED
                .iter()
                .map(|&col| {
                    let vals: Vec<f64> = ok.iter().filter_map(|r| r.numeric(col)).collect();
                    let (mean, std) = mean_std(&vals);
                    (col, mean, std)
                })
                .collect();
            AggregateRow {
                label: key.0,
                sweep_axis: members[0].sweep_axis.clone(),
                sweep_value: members[0].sweep_value,
                count: ok.len(),
                failed: members.len() - ok.len(),
                stats,
            }
        })
        .collect()
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_results(rows, BufWriter::new(fs::File::create(path)?))
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        // serde only emits the header alongside the first record
        w.write_record(RESULT_HEADER).map_err(csv_error)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub const RESULT_HEADER: &[&str] = &[
    "sample",
    "label",
    "sweep_axis",
    "sweep_value",
    "height",
    "width",
    "n_nodes",
    "k",
    "k_effective",
    "components_before",
    "percentile",
    "scale_mode",
    "on_disconnect",
    "mst_length",
    "hull_area",
    "hull_degenerate",
    "q_spread",
    "q_cohesion",
    "mstc_raw",
    "mstc_scaled",
    "scale_constant",
    "sparseness",
    "complexity",
    "effective_complexity",
    "seconds",
    "error",
];

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> MstcError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => MstcError::Io(io),
            _ => unreachable!(),
        }
    } else {
        MstcError::Format(e.to_string())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_aggregates_csv(aggs: &[AggregateRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header = vec![
        "label".to_string(),
        "sweep_axis".into(),
        "sweep_value".into(),
        "count".into(),
        "failed".into(),
    ];
    for col in AGGREGATED {
        header.push(format!("{col}_mean"));
        header.push(format!("{col}_std"));
    }
    w.write_record(&header).map_err(csv_error)?;
    for a in aggs {
        let mut rec = vec![
            a.label.clone(),
            a.sweep_axis.clone(),
            opt(a.sweep_value),
            a.count.to_string(),
            a.failed.to_string(),
        ];
        for (_, mean, std) in &a.stats {
            rec.push(opt(*mean));
            rec.push(opt(*std));
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    /// `col=value` pairs joined by `;`, or `all` without grouping.
    pub group: String,
    pub metric_a: String,
    pub metric_b: String,
    pub n: usize,
    pub r: Option<f64>,
    pub note: String,
}

fn group_rows<'a>(rows: &'a [ResultRow], group_by: &[&str]) -> Vec<(String, Vec<&'a ResultRow>)> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<String, Vec<&ResultRow>> = BTreeMap::new();
    for row in rows.iter().filter(|r| !r.failed()) {
        let key = if group_by.is_empty() {
            "all".to_string()
        } else {
            group_by
                .iter()
                .map(|c| format!("{c}={}", row.group_value(c).unwrap_or_default()))
                .collect::<Vec<_>>()
                .join(";")
        };
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(row);
    }
    order
        .into_iter()
        .map(|k| {
            let rows = groups.remove(&k).unwrap();
            (k, rows)
        })
        .collect()
}

fn correlate_group(rows: &[&ResultRow], a: &str, b: &str) -> (usize, Option<f64>, String) {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| Some((r.numeric(a)?, r.numeric(b)?)))
        .unzip();
    match pearson(&xs, &ys) {
        Ok(r) => (xs.len(), Some(r), String::new()),
        Err(MstcError::ZeroVariance) => (xs.len(), None, "zero variance".into()),
        Err(_) => (xs.len(), None, "fewer than 2 rows".into()),
    }
}

/// Pearson r between two numeric columns within each group. Groups whose
/// columns are constant report `r = None` with a note.
pub fn correlate(
    rows: &[ResultRow],
    metric_a: &str,
    metric_b: &str,
    group_by: &[&str],
) -> Result<Vec<CorrelationRow>> {
    for col in [metric_a, metric_b] {
        if !NUMERIC_COLUMNS.contains(&col) {
            return Err(MstcError::InvalidSpec(format!(
                "'{col}' is not a numeric column"
            )));
        }
    }
    Ok(group_rows(rows, group_by)
        .into_iter()
        .map(|(group, members)| {
            let (n, r, note) = correlate_group(&members, metric_a, metric_b);
            CorrelationRow {
                group,
                metric_a: metric_a.into(),
                metric_b: metric_b.into(),
                n,
                r,
                note,
            }
        })
        .collect())
}

pub fn write_correlations_csv<W: Write>(rows: &[CorrelationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "metric_a", "metric_b", "n", "r", "note"])
        .map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.group.as_str(),
            &r.metric_a,
            &r.metric_b,
            &r.n.to_string(),
            &opt(r.r),
            &r.note,
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Correlation of `metric` against each of `others`, one row per group:
/// `group,n,<other_1>,<other_2>,...`.
pub fn write_correlation_matrix_csv<W: Write>(
    rows: &[ResultRow],
    metric: &str,
    others: &[&str],
    group_by: &[&str],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["group".to_string(), "n".to_string()];
    header.extend(others.iter().map(|o| o.to_string()));
    w.write_record(&header).map_err(csv_error)?;
    for other in others {
        if !NUMERIC_COLUMNS.contains(other) {
            return Err(MstcError::InvalidSpec(format!(
                "'{other}' is not a numeric column"
            )));
        }
    }
    for (group, members) in group_rows(rows, group_by) {
        let mut rec = vec![group, members.len().to_string()];
        for other in others {
            rec.push(opt(correlate_group(&members, metric, other).1));
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.dot` (tree over pinned pixel positions) and/or
/// `<stem>_points.csv` (`index,row,col,value`), `<stem>_mst.csv` and
/// `<stem>_knn.csv` edge lists. Returns the written paths.
pub fn export_overlay(
    analysis: &Analysis,
    map: &AttributionMap,
    dir: &Path,
    stem: &str,
    dot: bool,
    csv: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let nodes = &analysis.salient.points;
    let mut written = Vec::new();
    if dot {
        let path = dir.join(format!("{stem}.dot"));
        write_dot(
            nodes,
            &analysis.tree.edges,
            BufWriter::new(fs::File::create(&path)?),
        )?;
        written.push(path);
    }
    if csv {
        let path = dir.join(format!("{stem}_points.csv"));
        let mut w = BufWriter::new(fs::File::create(&path)?);
        writeln!(w, "index,row,col,value")?;
        for (i, p) in nodes.iter().enumerate() {
            let v = map.get(p.row as usize, p.col as usize);
            writeln!(w, "{i},{},{},{v:?}", p.row, p.col)?;
        }
        w.flush()?;
        written.push(path);

        let path = dir.join(format!("{stem}_mst.csv"));
        write_edge_csv(
            &analysis.tree.edges,
            BufWriter::new(fs::File::create(&path)?),
        )?;
        written.push(path);

        let path = dir.join(format!("{stem}_knn.csv"));
        write_edge_csv(
            &analysis.graph.edges,
            BufWriter::new(fs::File::create(&path)?),
        )?;
        written.push(path);
    }
    Ok(written)
}
