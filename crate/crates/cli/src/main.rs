use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mstc_core::harness::{
    self, write_correlation_matrix_csv, write_correlations_csv, write_results, OutputOptions,
    DEFAULT_EFFECTIVE_EPS,
};
use mstc_core::{
    analyze, generate, load_map_auto, parse_manifest, run_batch, save_map, MapFormat, MetricConfig,
    OnDisconnect, RunConfig, Sample, ScaleMode, Sweep, SweepAxis, SynthSpec,
};

/// Structural compactness (MST-C) of attribution heatmaps.
#[derive(Parser)]
#[command(name = "mstc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score heatmaps with one configuration.
    Score(BatchArgs),
    /// Score heatmaps across a list of k, percentile or resolution values.
    Sweep {
        #[command(flatten)]
        batch: BatchArgs,
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Pearson correlation between columns of a results.csv.
    Correlate {
        results: PathBuf,
        #[arg(long, default_value = "mstc_scaled")]
        a: String,
        /// Second column; repeat or comma-separate for a matrix row per group.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "sparseness,complexity,effective_complexity"
        )]
        b: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        group_by: Vec<String>,
        /// Emit one row per group with a column per `--b` metric.
        #[arg(long)]
        matrix: bool,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write report JSON, DOT, point and edge lists for one heatmap.
    Export {
        input: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        out: PathBuf,
        /// File stem (defaults to the input's).
        #[arg(long)]
        stem: Option<String>,
    },
    /// Generate a synthetic heatmap from a JSON spec.
    Synth {
        /// Inline JSON or a path to a JSON file.
        #[arg(long)]
        spec: String,
        /// Output map; format from extension (.csv, .npy).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long, default_value_t = 500)]
    k: usize,
    #[arg(long, default_value_t = 80.0)]
    percentile: f64,
    #[arg(long, default_value = "paper_diag_x100")]
    scale_mode: ScaleMode,
    #[arg(long, default_value = "error")]
    on_disconnect: OnDisconnect,
}

impl MetricArgs {
    fn config(&self) -> MetricConfig {
        MetricConfig::default()
            .with_k(self.k)
            .with_percentile(self.percentile)
            .with_scale_mode(self.scale_mode)
            .with_on_disconnect(self.on_disconnect)
    }
}

#[derive(Args)]
struct BatchArgs {
    /// Map files, or directories scanned for .csv/.txt/.npy/.pgm files.
    inputs: Vec<PathBuf>,
    /// Manifest of `path[,label]` lines.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    metric: MetricArgs,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory for results.csv, aggregates.csv and reports/.
    /// Without it results.csv goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_reports: bool,
    /// Write overlays/<sample>.dot.
    #[arg(long)]
    dot: bool,
    /// Write point, MST and kNN edge CSVs under overlays/.
    #[arg(long)]
    edges: bool,
    /// Magnitude threshold for effective complexity.
    #[arg(long, default_value_t = DEFAULT_EFFECTIVE_EPS)]
    eps: f64,
    /// Aggregate per (label, sweep point) rather than per sweep point.
    #[arg(long)]
    by_label: bool,
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    match s {
        "k" => Ok(SweepAxis::K),
        "percentile" => Ok(SweepAxis::Percentile),
        "resolution" => Ok(SweepAxis::Resolution),
        other => Err(format!(
            "unknown sweep axis '{other}' (k, percentile, resolution)"
        )),
    }
}

fn collect_samples(args: &BatchArgs) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    if let Some(m) = &args.manifest {
        samples.extend(parse_manifest(m).with_context(|| format!("reading {}", m.display()))?);
    }
    for input in &args.inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(input)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && MapFormat::from_path(p).is_some())
                .collect();
            files.sort();
            samples.extend(files.into_iter().map(|p| Sample::from_file(p, "")));
        } else {
            samples.push(Sample::from_file(input, ""));
        }
    }
    if samples.is_empty() {
        bail!("no input maps given");
    }
    harness::dedup_ids(&mut samples);
    Ok(samples)
}

fn batch(args: &BatchArgs, sweep: Sweep) -> Result<ExitCode> {
    let mut config = RunConfig::new(collect_samples(args)?, args.metric.config()).with_sweep(sweep);
    config.workers = args.workers;
    config.effective_eps = args.eps;
    config.aggregate_by_label = args.by_label;
    config.output = args.out.as_ref().map(|dir| OutputOptions {
        dir: dir.clone(),
        reports: !args.no_reports,
        dot: args.dot,
        edges: args.edges,
    });
    let results = run_batch(&config)?;

    match &args.out {
        Some(dir) => {
            let ok = results.rows.iter().filter(|r| !r.failed()).count();
            eprintln!(
                "{} rows ({} failed) -> {}",
                results.rows.len(),
                results.rows.len() - ok,
                dir.display()
            );
        }
        None => {
            write_results(&results.rows, io::stdout().lock())?;
        }
    }
    for row in results.rows.iter().filter(|r| r.failed()) {
        eprintln!(
            "{}: {}",
            row.sample,
            row.error.as_deref().unwrap_or_default()
        );
    }
    Ok(if results.any_failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn correlate(
    results: &Path,
    a: &str,
    b: &[String],
    group_by: &[String],
    matrix: bool,
    out: Option<&Path>,
) -> Result<()> {
    let rows = harness::read_results_csv(results)
        .with_context(|| format!("reading {}", results.display()))?;
    let group_by: Vec<&str> = group_by.iter().map(String::as_str).collect();
    let b: Vec<&str> = b.iter().map(String::as_str).collect();
    let mut buf = Vec::new();
    if matrix {
        write_correlation_matrix_csv(&rows, a, &b, &group_by, &mut buf)?;
    } else {
        let mut table = Vec::new();
        for other in &b {
            table.extend(harness::correlate(&rows, a, other, &group_by)?);
        }
        write_correlations_csv(&table, &mut buf)?;
    }
    match out {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn export(input: &Path, metric: &MetricArgs, out: &Path, stem: Option<&str>) -> Result<()> {
    let map = load_map_auto(input).with_context(|| format!("loading {}", input.display()))?;
    let analysis = analyze(&map, &metric.config())?;
    let stem = match stem {
        Some(s) => s.to_string(),
        None => input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "map".into()),
    };
    let mut written = harness::export_overlay(&analysis, &map, out, &stem, true, true)?;
    let report = out.join(format!("{stem}.json"));
    fs::write(&report, serde_json::to_string_pretty(&analysis.report)?)?;
    written.push(report);
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn synth(spec: &str, out: &Path) -> Result<()> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?
    };
    let spec: SynthSpec = serde_json::from_str(&text).context("parsing synth spec")?;
    let map = generate(&spec)?;
    let format = MapFormat::from_path(out)
        .with_context(|| format!("cannot infer map format from {}", out.display()))?;
    save_map(&map, out, format)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Score(args) => batch(&args, Sweep::none()),
        Command::Sweep {
            batch: args,
            axis,
            values,
        } => batch(&args, Sweep::new(axis, values)),
        Command::Correlate {
            results,
            a,
            b,
            group_by,
            matrix,
            out,
        } => correlate(&results, &a, &b, &group_by, matrix, out.as_deref())
            .map(|_| ExitCode::SUCCESS),
        Command::Export {
            input,
            metric,
            out,
            stem,
        } => export(&input, &metric, &out, stem.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Synth { spec, out } => synth(&spec, &out).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
