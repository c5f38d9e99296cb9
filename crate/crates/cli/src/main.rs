//! Batch command-line surface for the clustering library: dataset
//! generation, per-node clustering, model merging, cluster regeneration,
//! the simulated multi-node pipeline, quality evaluation, and SVG plots.
//!
//! Subcommands compose via files (CSV, model documents, SVG). Given fixed
//! seeds, every subcommand is a pure function of its input files and flags:
//! repeated runs produce byte-identical output.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error. All
//! errors go to standard error as one `error[<category>]: ...` line.

mod subproc;
mod svg;

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};

use boundclust::boundary::{BoundaryPredicate, BoundarySet, RhoMode};
use boundclust::datasets::{self, ShapeSpec};
use boundclust::geometry::Point;
use boundclust::global_merge;
use boundclust::harness::{self, PipelineConfig, PipelineReport};
use boundclust::local_model::{self, LocalParams};
use boundclust::metrics::{self, QualityReport};
use boundclust::regenerate::{self, RegeneratedCluster};
use boundclust::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

/// When `--out` is omitted, outputs land in this directory (default `.`).
const OUT_DIR_ENV: &str = "BOUNDCLUST_OUT";

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            let rendered = e.render().to_string();
            let rendered = rendered.strip_prefix("error: ").unwrap_or(&rendered);
            eprint!("error[usage]: {rendered}");
            std::process::exit(1);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("error[{}]: {e}", e.category());
        std::process::exit(2);
    }
}

#[derive(Parser)]
#[command(
    name = "boundclust",
    version,
    about = "Distributed density-based clustering via cluster boundaries",
    after_help = "When --out is omitted, files land in $BOUNDCLUST_OUT (default '.'). \
                  Pass '-' as a file argument to use standard input/output."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic 2-D dataset as CSV
    Generate(GenerateArgs),
    /// Deal a CSV of points into per-node partition files
    Partition(PartitionArgs),
    /// Cluster one partition and emit its local model document
    Local(LocalArgs),
    /// Merge local model documents into a global model document
    Merge(MergeArgs),
    /// Regenerate clusters from a global model document
    Regen(RegenArgs),
    /// Run partition/local/merge/regen end to end from a config file
    Pipeline(PipelineArgs),
    /// Run the pipeline and score it against ground-truth labels
    Eval(EvalArgs),
    /// Plot points, and optionally model boundaries, as SVG
    Plot(PlotArgs),
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(args) => run_generate(args),
        Command::Partition(args) => run_partition(args),
        Command::Local(args) => run_local(args),
        Command::Merge(args) => run_merge(args),
        Command::Regen(args) => run_regen(args),
        Command::Pipeline(args) => run_pipeline_cmd(args),
        Command::Eval(args) => run_eval(args),
        Command::Plot(args) => run_plot(args),
    }
}

// ---------------------------------------------------------------------------
// Shared flag groups and small helpers
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CsvInOpts {
    /// Input CSV of points, or '-' for standard input
    #[arg(long = "in", value_name = "FILE")]
    input: String,
    /// The input has no header line
    #[arg(long)]
    no_header: bool,
    /// The input has a trailing integer label column
    #[arg(long)]
    labeled: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredicateArg {
    Cone,
    Sphere,
}

impl From<PredicateArg> for BoundaryPredicate {
    fn from(p: PredicateArg) -> Self {
        match p {
            PredicateArg::Cone => BoundaryPredicate::Cone,
            PredicateArg::Sphere => BoundaryPredicate::Sphere,
        }
    }
}

fn parse_rho(s: &str) -> std::result::Result<RhoMode, String> {
    match s {
        "auto" => Ok(RhoMode::Auto),
        "auto_per_point" => Ok(RhoMode::AutoPerPoint),
        other => other
            .parse::<f64>()
            .map(RhoMode::Fixed)
            .map_err(|_| format!("expected 'auto', 'auto_per_point', or a number, got {other:?}")),
    }
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn default_out(name: &str) -> String {
    out_dir().join(name).to_string_lossy().into_owned()
}

/// Attach the offending path to an io error (the kind is preserved).
fn at_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| at_path(path, e))
}

fn read_text(input: &str) -> Result<String> {
    if input == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        read_file(Path::new(input))
    }
}

fn read_points(opts: &CsvInOpts) -> Result<(Vec<Point>, Option<Vec<i64>>)> {
    let source = if opts.input == "-" { "stdin" } else { &opts.input };
    let text = read_text(&opts.input)?;
    datasets::parse_csv(&text, !opts.no_header, opts.labeled, source)
}

/// Write text to a file, creating parent directories and ensuring a trailing
/// newline.
fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| at_path(parent, e))?;
        }
    }
    let result = if text.ends_with('\n') {
        fs::write(path, text)
    } else {
        fs::write(path, format!("{text}\n"))
    };
    result.map_err(|e| at_path(path, e))
}

/// [`write_file`], or verbatim to standard output when `dest` is "-" (no
/// newline is added, so documents can be piped untouched).
fn write_text(dest: &str, text: &str) -> Result<()> {
    if dest == "-" {
        std::io::stdout().lock().write_all(text.as_bytes())?;
        Ok(())
    } else {
        write_file(Path::new(dest), text)
    }
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_file(path)?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string().trim().replace('\n', " "),
    })
}

/// Warn when the scene cannot be drawn in its native dimension.
fn dim_warning(points: &[Point]) {
    match points.first().map_or(2, Vec::len) {
        0 | 2 => {}
        1 => eprintln!("warning[plot]: 1-D input; plotting points on the x axis"),
        d => eprintln!("warning[plot]: {d}-D input; plotting the first two coordinates"),
    }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Two disks, a hook-shaped spiral, and a third disk (~15k points)
    Ds1,
    /// Three disks and a Gaussian blob (~17k points)
    Ds9,
}

#[derive(Args)]
struct GenerateArgs {
    /// Built-in scene preset
    #[arg(long, value_enum, conflicts_with = "shapes")]
    preset: Option<Preset>,
    /// TOML scene description: a [[shapes]] table per shape
    #[arg(long, value_name = "FILE")]
    shapes: Option<PathBuf>,
    /// Base seed for --preset scenes (shape files carry their own seeds)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append each point's shape index as a label column
    #[arg(long)]
    labels: bool,
    /// Omit the header line
    #[arg(long)]
    no_header: bool,
    /// Output CSV, or '-' [default: points.csv in the output directory]
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapesFile {
    shapes: Vec<ShapeSpec>,
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let specs = match (args.preset, &args.shapes) {
        (Some(Preset::Ds1), None) => datasets::ds1_like(args.seed),
        (Some(Preset::Ds9), None) => datasets::ds9_like(args.seed),
        (None, Some(path)) => parse_toml::<ShapesFile>(path)?.shapes,
        (None, None) => return Err(Error::InvalidInput("pass --preset or --shapes".into())),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let (points, labels) = datasets::generate(&specs)?;
    let text = datasets::format_csv(
        &points,
        args.labels.then_some(labels.as_slice()),
        !args.no_header,
    )?;
    write_text(&args.out.unwrap_or_else(|| default_out("points.csv")), &text)
}

// ---------------------------------------------------------------------------
// partition
// ---------------------------------------------------------------------------

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    input: CsvInOpts,
    /// Number of partitions
    #[arg(long)]
    nodes: usize,
    /// Shuffle seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for part<i>.csv files [default: the output directory]
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

fn run_partition(args: PartitionArgs) -> Result<()> {
    let (points, _) = read_points(&args.input)?;
    let parts = harness::partition(&points, args.nodes, args.seed)?;
    let dir = args.out_dir.unwrap_or_else(out_dir);
    fs::create_dir_all(&dir)?;
    for (i, part) in parts.iter().enumerate() {
        datasets::save_csv(&dir.join(format!("part{i}.csv")), part, None, true)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// local
// ---------------------------------------------------------------------------

#[derive(Args)]
struct LocalArgs {
    #[command(flatten)]
    input: CsvInOpts,
    /// Clustering neighbourhood radius
    #[arg(long)]
    eps: f64,
    /// Core-point threshold; the count includes the point itself
    #[arg(long, default_value_t = 5)]
    min_pts: usize,
    /// Boundary-detection radius [default: the value of --eps]
    #[arg(long)]
    eps_b: Option<f64>,
    /// Cone half-aperture in radians [default: 0.5236 = pi/6; 30 degrees
    /// separates rim from interior best in practice]
    #[arg(long)]
    nu: Option<f64>,
    /// Cone half-aperture in degrees, as an alternative to --nu
    #[arg(long, conflicts_with = "nu")]
    nu_degrees: Option<f64>,
    /// Boundary predicate
    #[arg(long, value_enum, default_value_t = PredicateArg::Cone)]
    predicate: PredicateArg,
    /// Sphere-offset distance: 'auto', 'auto_per_point', or a number
    #[arg(long, default_value = "auto", value_parser = parse_rho)]
    rho: RhoMode,
    /// Node id recorded in the model document
    #[arg(long, default_value_t = 0)]
    node_id: u64,
    /// Output model document, or '-' [default: model.json in the output
    /// directory]
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

fn run_local(args: LocalArgs) -> Result<()> {
    let (points, _) = read_points(&args.input)?;
    let nu = match (args.nu, args.nu_degrees) {
        (Some(radians), None) => radians,
        (None, Some(degrees)) => degrees.to_radians(),
        (None, None) => std::f64::consts::FRAC_PI_6,
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let params = LocalParams {
        eps: args.eps,
        eps_b: args.eps_b.unwrap_or(args.eps),
        min_pts: args.min_pts,
        nu,
        predicate: args.predicate.into(),
        rho: args.rho,
    };
    let model = local_model::build_local_model(&points, &params, args.node_id)?;
    let doc = local_model::serialize(&model)?;
    write_text(&args.out.unwrap_or_else(|| default_out("model.json")), &doc)
}

// ---------------------------------------------------------------------------
// merge
// ---------------------------------------------------------------------------

#[derive(Args)]
struct MergeArgs {
    /// Local model documents to merge
    #[arg(value_name = "MODEL", required = true)]
    models: Vec<PathBuf>,
    /// Merge radius [default: the largest eps_b among the models]
    #[arg(long)]
    g_eps: Option<f64>,
    /// Merge cone aperture in radians [default: the largest nu among the
    /// models]
    #[arg(long)]
    g_nu: Option<f64>,
    /// Merge cone aperture in degrees, as an alternative to --g-nu
    #[arg(long, conflicts_with = "g_nu")]
    g_nu_degrees: Option<f64>,
    /// Merge predicate [default: the lowest-numbered node's predicate]
    #[arg(long, value_enum)]
    predicate: Option<PredicateArg>,
    /// Output global document, or '-' [default: global.json in the output
    /// directory]
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

fn run_merge(args: MergeArgs) -> Result<()> {
    let mut models = Vec::with_capacity(args.models.len());
    for path in &args.models {
        models.push(local_model::deserialize(&read_file(path)?)?);
    }
    let mut params = global_merge::derive_global_params(&models)?;
    if let Some(g_eps) = args.g_eps {
        params.g_eps = g_eps;
    }
    if let Some(g_nu) = args.g_nu {
        params.g_nu = g_nu;
    }
    if let Some(degrees) = args.g_nu_degrees {
        params.g_nu = degrees.to_radians();
    }
    if let Some(predicate) = args.predicate {
        params.predicate = predicate.into();
    }
    let global = global_merge::merge(&models, &params)?;
    write_text(
        &args.out.unwrap_or_else(|| default_out("global.json")),
        &global_merge::serialize_global(&global)?,
    )
}

// ---------------------------------------------------------------------------
// regen
// ---------------------------------------------------------------------------

#[derive(Args)]
struct RegenArgs {
    /// Global model document, or '-' for standard input
    #[arg(long, value_name = "FILE")]
    global: String,
    /// Seed; each cluster draws from its own stream derived from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Give up on a cluster after this many rejected draws per target point
    #[arg(long, default_value_t = regenerate::DEFAULT_MAX_ATTEMPTS_FACTOR)]
    max_attempts_factor: usize,
    /// Output CSV with a trailing cluster column, or '-' [default:
    /// regenerated.csv in the output directory]
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

fn run_regen(args: RegenArgs) -> Result<()> {
    let global = global_merge::deserialize_global(&read_text(&args.global)?)?;
    let clusters = regenerate::regenerate_all_with(&global, args.seed, args.max_attempts_factor);
    let failures = warn_regen_failures(&clusters);
    if failures == clusters.len() && !clusters.is_empty() {
        return Err(Error::Validation(format!(
            "regeneration failed for all {} clusters",
            clusters.len()
        )));
    }
    let (points, labels) = pool_regenerated(&clusters);
    let text = datasets::format_csv(&points, Some(&labels), true)?;
    write_text(
        &args.out.unwrap_or_else(|| default_out("regenerated.csv")),
        &text,
    )
}

/// Flatten regenerated clusters into one labelled point list, in cluster
/// order.
fn pool_regenerated(clusters: &[RegeneratedCluster]) -> (Vec<Point>, Vec<i64>) {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for cluster in clusters {
        for p in &cluster.points {
            points.push(p.clone());
            labels.push(cluster.global_id as i64);
        }
    }
    (points, labels)
}

fn warn_regen_failures(clusters: &[RegeneratedCluster]) -> usize {
    let mut failures = 0;
    for cluster in clusters {
        if let Some(message) = &cluster.error {
            failures += 1;
            eprintln!("warning[regen]: cluster {}: {message}", cluster.global_id);
        }
    }
    failures
}

// ---------------------------------------------------------------------------
// pipeline / eval
// ---------------------------------------------------------------------------

/// On-disk run configuration for `pipeline` and `eval`: where the points
/// come from (exactly one of `input` / `[dataset]`) plus the pipeline
/// parameters.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    /// CSV file of input points.
    input: Option<PathBuf>,
    /// The input CSV has a trailing integer label column (used as ground
    /// truth by `eval`).
    #[serde(default)]
    input_labeled: bool,
    /// The input CSV has no header line.
    #[serde(default)]
    input_no_header: bool,
    dataset: Option<DatasetConfig>,
    pipeline: PipelineConfig,
}

/// Generate the input instead of reading it: exactly one of `preset` /
/// `shapes`. `seed` applies to presets only.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetConfig {
    preset: Option<String>,
    #[serde(default)]
    seed: u64,
    shapes: Option<Vec<ShapeSpec>>,
}

fn load_run_input(cfg: &RunConfig) -> Result<(Vec<Point>, Option<Vec<i64>>)> {
    match (&cfg.input, &cfg.dataset) {
        (Some(path), None) => {
            let text = read_file(path)?;
            datasets::parse_csv(
                &text,
                !cfg.input_no_header,
                cfg.input_labeled,
                &path.display().to_string(),
            )
        }
        (None, Some(ds)) => {
            let specs = match (&ds.preset, &ds.shapes) {
                (Some(name), None) => preset_specs(name, ds.seed)?,
                (None, Some(shapes)) => shapes.clone(),
                _ => {
                    return Err(Error::InvalidInput(
                        "[dataset] needs exactly one of preset or shapes".into(),
                    ))
                }
            };
            let (points, labels) = datasets::generate(&specs)?;
            Ok((points, Some(labels)))
        }
        _ => Err(Error::InvalidInput(
            "config needs exactly one of input or [dataset]".into(),
        )),
    }
}

fn preset_specs(name: &str, seed: u64) -> Result<Vec<ShapeSpec>> {
    match name {
        "ds1" => Ok(datasets::ds1_like(seed)),
        "ds9" => Ok(datasets::ds9_like(seed)),
        other => Err(Error::InvalidInput(format!(
            "unknown preset {other:?} (available: ds1, ds9)"
        ))),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    /// Run nodes as threads in this process
    InProcess,
    /// Run each node as a child invocation of this binary
    Subprocess,
}

#[derive(Args)]
struct PipelineArgs {
    /// Run configuration (TOML)
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory [default: 'run' in the output directory]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Node execution backend
    #[arg(long, value_enum, default_value_t = BackendArg::InProcess)]
    backend: BackendArg,
}

fn run_pipeline_cmd(args: PipelineArgs) -> Result<()> {
    let cfg: RunConfig = parse_toml(&args.config)?;
    let (points, labels) = load_run_input(&cfg)?;
    let report = match args.backend {
        BackendArg::InProcess => harness::run_pipeline(&points, &cfg.pipeline)?,
        BackendArg::Subprocess => {
            harness::run_pipeline_with(&points, &cfg.pipeline, &subproc::Subprocess::current()?)?
        }
    };
    warn_regen_failures(&report.regenerated);
    let out = args.out.unwrap_or_else(|| out_dir().join("run"));
    write_run_artifacts(&out, &points, labels.as_deref(), &report)?;
    println!(
        "{} points -> {} nodes -> {} global clusters -> {} regenerated points",
        points.len(),
        report.partition_sizes.len(),
        report.final_global.clusters.len(),
        report
            .regenerated
            .iter()
            .map(|c| c.points.len())
            .sum::<usize>(),
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn write_run_artifacts(
    out: &Path,
    points: &[Point],
    labels: Option<&[i64]>,
    report: &PipelineReport,
) -> Result<()> {
    fs::create_dir_all(out)?;
    write_file(
        &out.join("points.csv"),
        &datasets::format_csv(points, labels, true)?,
    )?;
    for model in &report.local_models {
        write_file(
            &out.join(format!("model_node{}.json", model.node_id)),
            &local_model::serialize(model)?,
        )?;
    }
    write_file(
        &out.join("global.json"),
        &global_merge::serialize_global(&report.final_global)?,
    )?;
    let (regen_points, regen_labels) = pool_regenerated(&report.regenerated);
    write_file(
        &out.join("regenerated.csv"),
        &datasets::format_csv(&regen_points, Some(&regen_labels), true)?,
    )?;
    write_file(&out.join("manifest.json"), &harness::run_manifest(report)?)?;

    dim_warning(points);
    let boundaries: Vec<(u64, BoundarySet)> = report
        .final_global
        .clusters
        .iter()
        .map(|c| (c.global_id, c.boundary.clone()))
        .collect();
    write_file(
        &out.join("points.svg"),
        &svg::render(&svg::Scene {
            points,
            labels,
            muted: false,
            boundaries: &[],
            balance: false,
        }),
    )?;
    write_file(
        &out.join("global.svg"),
        &svg::render(&svg::Scene {
            points,
            labels: None,
            muted: true,
            boundaries: &boundaries,
            balance: true,
        }),
    )?;
    write_file(
        &out.join("regenerated.svg"),
        &svg::render(&svg::Scene {
            points: &regen_points,
            labels: Some(&regen_labels),
            muted: false,
            boundaries: &boundaries,
            balance: false,
        }),
    )?;
    Ok(())
}

#[derive(Args)]
struct EvalArgs {
    /// Run configuration (TOML); needs a [dataset] section or
    /// input_labeled = true so ground truth exists
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Also write the metrics as a one-row CSV file
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let cfg: RunConfig = parse_toml(&args.config)?;
    let (points, labels) = load_run_input(&cfg)?;
    let labels = labels.ok_or_else(|| {
        Error::InvalidInput(
            "evaluation needs ground-truth labels: use a [dataset] config or set \
             input_labeled = true"
                .into(),
        )
    })?;
    let report = harness::run_pipeline(&points, &cfg.pipeline)?;
    warn_regen_failures(&report.regenerated);
    let quality = metrics::evaluate_pipeline(&report, &points, &labels)?;
    print!("{}", quality.to_text());
    if let Some(out) = args.out {
        write_file(
            &out,
            &format!("{}\n{}", QualityReport::csv_header(), quality.to_csv_row()),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    input: CsvInOpts,
    /// Overlay boundary members from a model document (local or global)
    #[arg(long, value_name = "FILE")]
    boundary: Option<PathBuf>,
    /// Draw each boundary member's balance vector as a short segment
    #[arg(long)]
    balance: bool,
    /// Output SVG, or '-' [default: plot.svg in the output directory]
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

fn run_plot(args: PlotArgs) -> Result<()> {
    let (points, labels) = read_points(&args.input)?;
    let boundaries = match &args.boundary {
        Some(path) => load_boundaries(path)?,
        None => Vec::new(),
    };
    dim_warning(&points);
    let doc = svg::render(&svg::Scene {
        points: &points,
        labels: labels.as_deref(),
        muted: false,
        boundaries: &boundaries,
        balance: args.balance,
    });
    write_text(&args.out.unwrap_or_else(|| default_out("plot.svg")), &doc)
}

/// Read boundary sets from either kind of model document; the two formats
/// are distinguished by the `node_id` field only local models carry.
fn load_boundaries(path: &Path) -> Result<Vec<(u64, BoundarySet)>> {
    let text = read_file(path)?;
    let probe: serde_json::Value = serde_json::from_str(&text)?;
    if probe.get("node_id").is_some() {
        let model = local_model::deserialize(&text)?;
        Ok(model
            .clusters
            .into_iter()
            .map(|c| (c.cluster_id, c.boundary))
            .collect())
    } else {
        let model = global_merge::deserialize_global(&text)?;
        Ok(model
            .clusters
            .into_iter()
            .map(|c| (c.global_id, c.boundary))
            .collect())
    }
}
