//! Subcommand dispatch: flag parsing, execution, human summaries, and
//! report emission.
//!
//! Every subcommand reads one JSON config, prints a short human summary to
//! standard output, and optionally writes a [`RunReport`] (`--json`) and a
//! tabular payload (`--csv`). Exit status 0 means success, 2 a
//! configuration or flag problem, 3 an exhausted enumeration budget, and 1
//! any other failure. The `IFLAB_BUDGET` environment variable overrides
//! every enumeration cap. All indices in reports — maps, vertices,
//! breakpoints, word letters — are 1-based, matching the config format and
//! the axis syntax; library APIs stay 0-based.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cplifs::dimension::{box_dimension_estimate, natural_dimension, DimensionMethod};
use cplifs::gdifs::{markov_measure, natural_exponent, simulate_entropy, MarkovMeasure};
use cplifs::generated::{esc_scan, esc_scan_exact, generate_selfsimilar, EscReport};
use cplifs::paramscan::{scan_regularity, Axis, CellFlag};
use cplifs::regularity::{default_max_order, regularity_order, RegularityStatus};
use cplifs::Word;
use serde_json::{json, Value};

use crate::config::{ConfigError, Settings, SystemConfig};
use crate::report::{cell, Csv, RunReport};

/// Simulation length of the `gdifs` entropy cross-check.
const SIM_STEPS: usize = 10_000;
/// Chain depth of the `gdifs` sandwich check.
const SANDWICH_DEPTH: usize = 4;

/// A dispatch failure carrying its process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Configuration or flag problem: exit 2.
    #[error("{0}")]
    Usage(String),
    /// An enumeration cap was hit: exit 3.
    #[error("{0}")]
    Budget(String),
    /// Any other runtime failure: exit 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(format!("config {e}"))
    }
}

/// Maps a computation failure; budget exhaustion keeps its own exit code.
fn compute_err(e: cplifs::Error) -> CliError {
    match e {
        cplifs::Error::BudgetExceeded(_) => CliError::Budget(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

/// Maps a scan failure: the scanner validates axes, grid, and range up
/// front, so those surface as usage errors.
fn scan_err(e: cplifs::Error) -> CliError {
    match e {
        cplifs::Error::BadAxis(_) | cplifs::Error::Invalid(_) => CliError::Usage(e.to_string()),
        other => compute_err(other),
    }
}

/// Piecewise-linear iterated function system laboratory.
#[derive(Debug, Parser)]
#[command(
    name = "iflab",
    version,
    about = "Analyze piecewise-linear and graph-directed iterated function systems"
)]
pub struct Cli {
    /// What to run.
    #[command(subcommand)]
    pub command: Command,
}

/// All subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a configuration and report structure, smallness, and the
    /// invariant interval.
    Validate(ValidateArgs),
    /// Estimate the attractor dimension (direct pressure root, spectral
    /// exponent, or both).
    Dim(DimArgs),
    /// Find the regularity order, or report irregularity evidence.
    Regularity(RegularityArgs),
    /// Scan translation separations of the generated self-similar system.
    Esc(EscArgs),
    /// Box-counting dimension estimate over a scale ladder.
    Boxdim(BoxdimArgs),
    /// Natural exponent, Markov measure, and entropy checks of a
    /// graph-directed system.
    Gdifs(GdifsArgs),
    /// Scan a 2-D parameter slice for regularity failure.
    Scan(ScanArgs),
}

/// Report destinations shared by every subcommand.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the full run report as JSON to this path.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write the tabular payload as CSV to this path.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

/// Arguments of `validate`.
#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// System configuration (JSON file).
    pub config: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

/// Dimension estimator choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Pressure-sum bisection on cylinder lengths.
    Direct,
    /// Natural exponent of the associated graph-directed system.
    Spectral,
    /// Both, cross-validated.
    Both,
}

/// Arguments of `dim`.
#[derive(Debug, Args)]
pub struct DimArgs {
    /// System configuration (JSON file).
    pub config: PathBuf,
    /// Estimator to run.
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Cylinder enumeration depth of the direct estimator.
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    /// Pressure residual accepted at the root (default 1e-9, or the
    /// config's settings.tol).
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Arguments of `regularity`.
#[derive(Debug, Args)]
pub struct RegularityArgs {
    /// System configuration (JSON file).
    pub config: PathBuf,
    /// Largest refinement order to try (default scales with the map
    /// count).
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Cylinder depth of the numeric proximity probe.
    #[arg(long, default_value_t = 40)]
    pub probe_depth: usize,
    /// Proximity tolerance of the probe (default 1e-9, or settings.tol).
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Arguments of `esc`.
#[derive(Debug, Args)]
pub struct EscArgs {
    /// System configuration (JSON file).
    pub config: PathBuf,
    /// Deepest composition level to scan.
    #[arg(long, default_value_t = 8)]
    pub max_level: usize,
    /// Run in exact rational arithmetic; every config number must be a
    /// rational string.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    out: OutputArgs,
}

/// Arguments of `boxdim`.
#[derive(Debug, Args)]
pub struct BoxdimArgs {
    /// System configuration (JSON file).
    pub config: PathBuf,
    /// Comma-separated scales in (0, 1) (default: largest slope modulus
    /// raised to 2..=7).
    #[arg(long, value_name = "R1,R2,...")]
    pub scales: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Arguments of `gdifs`.
#[derive(Debug, Args)]
pub struct GdifsArgs {
    /// System configuration (JSON file).
    pub config: PathBuf,
    /// Seed of the Monte-Carlo entropy cross-check (default: settings.seed
    /// or 7).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Arguments of `scan`.
#[derive(Debug, Args)]
pub struct ScanArgs {
    /// System configuration (JSON file).
    pub config: PathBuf,
    /// The two scanned axes, comma separated: `b<map>.<index>` for a
    /// breakpoint, `tau<map>` for a translation (1-based, e.g.
    /// `b1.1,tau1`).
    #[arg(long, value_name = "AXIS1,AXIS2")]
    pub axes: String,
    /// Shared axis range `lo,hi`.
    #[arg(long, value_name = "LO,HI")]
    pub range: String,
    /// Cells per axis (at least 8).
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Seed, echoed into the report (the scan itself is deterministic).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Regularity order cap per cell.
    #[arg(long, default_value_t = 8)]
    pub max_order: usize,
    /// Proximity probe depth per cell.
    #[arg(long, default_value_t = 12)]
    pub probe_depth: usize,
    #[command(flatten)]
    out: OutputArgs,
}

/// Parses the process arguments, runs, and returns the exit status.
pub fn run() -> i32 {
    match execute(Cli::parse()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one parsed command line.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Dim(a) => cmd_dim(a),
        Command::Regularity(a) => cmd_regularity(a),
        Command::Esc(a) => cmd_esc(a),
        Command::Boxdim(a) => cmd_boxdim(a),
        Command::Gdifs(a) => cmd_gdifs(a),
        Command::Scan(a) => cmd_scan(a),
    }
}

/// A config file together with its raw text (for digesting).
struct Loaded {
    text: String,
    config: SystemConfig,
}

fn load(path: &PathBuf) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let config = SystemConfig::parse(&text)?;
    Ok(Loaded { text, config })
}

/// Enumeration budget: `IFLAB_BUDGET`, else settings, else the library
/// default.
fn budget_for(settings: &Settings) -> Result<usize, CliError> {
    match std::env::var("IFLAB_BUDGET") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!(
                "IFLAB_BUDGET must be a positive integer, got {s:?}"
            ))),
        },
        Err(std::env::VarError::NotPresent) => {
            Ok(settings.budget.unwrap_or(cplifs::DEFAULT_BUDGET))
        }
        Err(e) => Err(CliError::Usage(format!("IFLAB_BUDGET: {e}"))),
    }
}

/// Prints warnings and writes the requested report files.
fn finish(
    command: &str,
    loaded: &Loaded,
    out: &OutputArgs,
    warnings: Vec<String>,
    results: Value,
    csv: Csv,
) -> Result<(), CliError> {
    for w in &warnings {
        println!("note: {w}");
    }
    if let Some(path) = &out.json {
        let report = RunReport::new(command, &loaded.text, warnings, results)
            .map_err(|e| CliError::Runtime(format!("report serialization: {e}")))?;
        fs::write(path, report.to_json())
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &out.csv {
        fs::write(path, csv.finish())
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Word letters shifted to the 1-based report convention.
fn word_json(w: &Word) -> Value {
    json!(w.iter().map(|&l| l + 1).collect::<Vec<_>>())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<(), CliError> {
    let loaded = load(&a.config)?;
    let (results, csv) = match &loaded.config {
        SystemConfig::Cplifs { .. } => {
            let sys = loaded.config.to_cplifs()?;
            let small = sys.check_small();
            let interval = sys.invariant_interval_default().map_err(compute_err)?;
            let exact = loaded.config.exact_similarities()?.is_some();
            let pieces: usize = sys.maps().iter().map(|f| f.piece_count()).sum();

            println!("kind: cplifs");
            println!("maps: {} ({} pieces)", sys.len(), pieces);
            println!(
                "small: {} (slope-modulus sum {})",
                yes_no(small.small),
                cell(small.rho_sum)
            );
            println!(
                "invariant interval: [{}, {}]",
                cell(interval.lo()),
                cell(interval.hi())
            );
            println!("exact: {}", yes_no(exact));

            let mut csv = Csv::new(&["map", "pieces", "rho", "injective", "within_bound"]);
            for (k, (f, s)) in sys.maps().iter().zip(&small.per_map).enumerate() {
                csv.row(&[
                    (k + 1).to_string(),
                    f.piece_count().to_string(),
                    cell(s.rho),
                    s.injective.to_string(),
                    s.within_bound.to_string(),
                ]);
            }
            let results = json!({
                "kind": "cplifs",
                "mapCount": sys.len(),
                "pieceCount": pieces,
                "small": {
                    "rhoSum": small.rho_sum,
                    "sumOk": small.sum_ok,
                    "small": small.small,
                    "perMap": small.per_map.iter().map(|s| json!({
                        "rho": s.rho,
                        "injective": s.injective,
                        "bound": s.bound,
                        "withinBound": s.within_bound,
                    })).collect::<Vec<_>>(),
                },
                "invariantInterval": [interval.lo(), interval.hi()],
                "exact": exact,
                "config": serde_json::to_value(&loaded.config)
                    .expect("config serializes"),
            });
            (results, csv)
        }
        SystemConfig::Gdifs { .. } => {
            let g = loaded.config.to_gdifs().map_err(CliError::from)?;
            println!("kind: gdifs");
            println!(
                "vertices: {}, edges: {}",
                g.vertex_count(),
                g.edges().len()
            );
            println!("largest ratio modulus: {}", cell(g.rho_max()));

            let mut csv = Csv::new(&["from", "to", "r", "t"]);
            for e in g.edges() {
                csv.row(&[
                    (e.source + 1).to_string(),
                    (e.target + 1).to_string(),
                    cell(e.r),
                    cell(e.t),
                ]);
            }
            let results = json!({
                "kind": "gdifs",
                "vertexCount": g.vertex_count(),
                "edgeCount": g.edges().len(),
                "stronglyConnected": true,
                "rhoMax": g.rho_max(),
                "config": serde_json::to_value(&loaded.config)
                    .expect("config serializes"),
            });
            (results, csv)
        }
    };
    finish("validate", &loaded, &a.out, Vec::new(), results, csv)
}

fn cmd_dim(a: DimArgs) -> Result<(), CliError> {
    let loaded = load(&a.config)?;
    let settings = loaded.config.settings().clone();
    let tol = a.tol.or(settings.tol).unwrap_or(1e-9);
    let mut warnings = Vec::new();

    let (results, csv) = match &loaded.config {
        SystemConfig::Cplifs { .. } => {
            let sys = loaded.config.to_cplifs()?;
            let budget = budget_for(&settings)?;
            let method = match a.method {
                MethodArg::Direct => DimensionMethod::Direct,
                MethodArg::Spectral => DimensionMethod::Spectral,
                MethodArg::Both => DimensionMethod::Both,
            };
            let report =
                natural_dimension(&sys, method, a.depth, tol, budget).map_err(compute_err)?;

            if report.point_attractor {
                println!("attractor is a single point; dimension 0");
            }
            let mut csv = Csv::new(&[
                "method",
                "dimension",
                "residual",
                "depth",
                "radius",
                "order",
                "degenerate",
            ]);
            if let Some(d) = &report.direct {
                println!(
                    "direct: {} (residual {}, depth {})",
                    cell(d.dimension),
                    cell(d.residual),
                    d.depth
                );
                csv.row(&[
                    "direct".into(),
                    cell(d.dimension),
                    cell(d.residual),
                    d.depth.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            if let Some(s) = &report.spectral {
                println!("spectral: {} (order {})", cell(s.dimension), s.order);
                csv.row(&[
                    "spectral".into(),
                    cell(s.dimension),
                    String::new(),
                    String::new(),
                    cell(s.radius),
                    s.order.to_string(),
                    s.degenerate.to_string(),
                ]);
            }
            let results = json!({
                "kind": "cplifs",
                "pointAttractor": report.point_attractor,
                "direct": report.direct.map(|d| json!({
                    "dimension": d.dimension,
                    "residual": d.residual,
                    "depth": d.depth,
                })),
                "spectral": report.spectral.map(|s| json!({
                    "dimension": s.dimension,
                    "radius": s.radius,
                    "order": s.order,
                    "degenerate": s.degenerate,
                })),
            });
            (results, csv)
        }
        SystemConfig::Gdifs { .. } => {
            let g = loaded.config.to_gdifs()?;
            if a.method != MethodArg::Both {
                warnings.push(
                    "method selection applies to piecewise-linear systems; \
                     a graph-directed system has one natural exponent"
                        .to_string(),
                );
            }
            let ne = natural_exponent(&g).map_err(compute_err)?;
            println!(
                "natural exponent: {}{}",
                cell(ne.alpha),
                if ne.degenerate { " (degenerate)" } else { "" }
            );
            let mut csv = Csv::new(&[
                "method",
                "dimension",
                "residual",
                "depth",
                "radius",
                "order",
                "degenerate",
            ]);
            csv.row(&[
                "exponent".into(),
                cell(ne.alpha),
                String::new(),
                String::new(),
                cell(ne.radius),
                String::new(),
                ne.degenerate.to_string(),
            ]);
            let results = json!({
                "kind": "gdifs",
                "alpha": ne.alpha,
                "radius": ne.radius,
                "degenerate": ne.degenerate,
            });
            (results, csv)
        }
    };
    finish("dim", &loaded, &a.out, warnings, results, csv)
}

fn cmd_regularity(a: RegularityArgs) -> Result<(), CliError> {
    let loaded = load(&a.config)?;
    let sys = loaded.config.to_cplifs()?;
    let settings = loaded.config.settings();
    let tol = a.tol.or(settings.tol).unwrap_or(1e-9);
    let max_order = a.max_order.unwrap_or_else(|| default_max_order(sys.len()));

    let report =
        regularity_order(&sys, max_order, a.probe_depth, tol).map_err(compute_err)?;

    let (status, order, certified) = match report.status {
        RegularityStatus::Regular(n) => ("regular", Some(n), None),
        RegularityStatus::Irregular { certified } => ("irregular", None, Some(certified)),
        RegularityStatus::Undetermined => ("undetermined", None, None),
    };
    match report.status {
        RegularityStatus::Regular(n) => println!("status: regular (order {n})"),
        RegularityStatus::Irregular { certified: true } => {
            println!("status: irregular (certified coincidence)")
        }
        RegularityStatus::Irregular { certified: false } => {
            println!("status: irregular (numeric evidence)")
        }
        RegularityStatus::Undetermined => {
            println!("status: undetermined (refined to order {})", report.max_order_tried)
        }
    }
    println!(
        "invariant interval: [{}, {}]",
        cell(report.interval.lo()),
        cell(report.interval.hi())
    );

    let mut csv = Csv::new(&[
        "map",
        "index",
        "value",
        "in_interval",
        "fixed_point_of",
        "near_deep_union",
    ]);
    for b in &report.breakpoints {
        csv.row(&[
            (b.map + 1).to_string(),
            (b.index + 1).to_string(),
            cell(b.value),
            b.in_interval.to_string(),
            b.fixed_point_of.map(|k| (k + 1).to_string()).unwrap_or_default(),
            b.near_deep_union.map(|n| n.to_string()).unwrap_or_default(),
        ]);
    }
    let results = json!({
        "status": status,
        "order": order,
        "certified": certified,
        "maxOrderTried": report.max_order_tried,
        "probeDepth": report.probe_depth,
        "membershipTol": report.membership_tol,
        "interval": [report.interval.lo(), report.interval.hi()],
        "witness": report.witness.as_ref().map(|w| json!({
            "word": word_json(&w.word),
            "cylinder": [w.cylinder.lo(), w.cylinder.hi()],
            "map": w.map + 1,
            "breakpoint": w.breakpoint + 1,
        })),
        "breakpoints": report.breakpoints.iter().map(|b| json!({
            "map": b.map + 1,
            "index": b.index + 1,
            "value": b.value,
            "inInterval": b.in_interval,
            "fixedPointOf": b.fixed_point_of.map(|k| k + 1),
            "nearDeepUnion": b.near_deep_union,
        })).collect::<Vec<_>>(),
    });
    finish("regularity", &loaded, &a.out, Vec::new(), results, csv)
}

fn cmd_esc(a: EscArgs) -> Result<(), CliError> {
    let loaded = load(&a.config)?;
    let sys = loaded.config.to_cplifs()?;
    let budget = budget_for(loaded.config.settings())?;

    // Exact and float scans share the report shape; distances differ in
    // rendering (rational string vs number).
    struct Row {
        level: usize,
        pair_count: usize,
        distance: Option<Value>,
        distance_cell: String,
    }
    let (rows, report_meta, exact) = if a.exact {
        let Some(pieces) = loaded.config.exact_similarities()? else {
            return Err(CliError::Usage(
                "exact mode needs every map number given as a rational string".into(),
            ));
        };
        let report: EscReport<_> =
            esc_scan_exact(&pieces, a.max_level, budget).map_err(compute_err)?;
        let rows = report
            .per_level
            .iter()
            .map(|l| Row {
                level: l.level,
                pair_count: l.pair_count,
                distance: l.min_distance.as_ref().map(|d| {
                    json!({ "rational": d.to_string(), "value": d.to_f64() })
                }),
                distance_cell: l
                    .min_distance
                    .as_ref()
                    .map(|d| d.to_string())
                    .unwrap_or_default(),
            })
            .collect::<Vec<_>>();
        let meta = (
            report.zero_witnesses,
            report.zero_pair_count,
            report.fitted_c,
            report.skipped_levels,
        );
        (rows, meta, true)
    } else {
        let ifs = generate_selfsimilar(&sys);
        let report = esc_scan(&ifs, a.max_level, budget).map_err(compute_err)?;
        let rows = report
            .per_level
            .iter()
            .map(|l| Row {
                level: l.level,
                pair_count: l.pair_count,
                distance: l.min_distance.map(|d| json!(d)),
                distance_cell: l.min_distance.map(cell).unwrap_or_default(),
            })
            .collect::<Vec<_>>();
        let meta = (
            report.zero_witnesses,
            report.zero_pair_count,
            report.fitted_c,
            report.skipped_levels,
        );
        (rows, meta, false)
    };
    let (zero_witnesses, zero_pair_count, fitted_c, skipped_levels) = report_meta;

    let mut warnings = Vec::new();
    if !skipped_levels.is_empty() {
        let listed: Vec<String> = skipped_levels.iter().map(usize::to_string).collect();
        warnings.push(format!(
            "levels skipped over the work budget: {}",
            listed.join(", ")
        ));
    }

    for r in &rows {
        match &r.distance_cell {
            s if s.is_empty() => {
                println!("level {}: no shared-ratio pairs", r.level)
            }
            s => println!("level {}: {} pairs, min distance {}", r.level, r.pair_count, s),
        }
    }
    if zero_pair_count > 0 {
        println!(
            "zero-distance pairs: {} (first witness at level {})",
            zero_pair_count,
            zero_witnesses.first().map(|w| w.level).unwrap_or(0)
        );
    }
    match fitted_c {
        Some(c) => println!("fitted separation base: {}", cell(c)),
        None => println!("fitted separation base: not enough positive levels"),
    }

    let mut csv = Csv::new(&["level", "pair_count", "min_distance", "skipped"]);
    for r in &rows {
        csv.row(&[
            r.level.to_string(),
            r.pair_count.to_string(),
            r.distance_cell.clone(),
            "false".into(),
        ]);
    }
    for &level in &skipped_levels {
        csv.row(&[
            level.to_string(),
            String::new(),
            String::new(),
            "true".into(),
        ]);
    }

    let results = json!({
        "exact": exact,
        "levels": rows.iter().map(|r| json!({
            "level": r.level,
            "pairCount": r.pair_count,
            "minDistance": r.distance,
        })).collect::<Vec<_>>(),
        "zeroWitnesses": zero_witnesses.iter().map(|w| json!({
            "level": w.level,
            "wordA": word_json(&w.word_a),
            "wordB": word_json(&w.word_b),
        })).collect::<Vec<_>>(),
        "zeroPairCount": zero_pair_count,
        "fittedC": fitted_c,
        "skippedLevels": skipped_levels,
    });
    finish("esc", &loaded, &a.out, warnings, results, csv)
}

fn cmd_boxdim(a: BoxdimArgs) -> Result<(), CliError> {
    let loaded = load(&a.config)?;
    let sys = loaded.config.to_cplifs()?;
    let budget = budget_for(loaded.config.settings())?;

    let scales = match &a.scales {
        Some(text) => parse_scales(text)?,
        None => {
            let rho = sys.rho_max();
            (2..=7).map(|k| rho.powi(k)).collect()
        }
    };
    let est = box_dimension_estimate(&sys, &scales, budget).map_err(compute_err)?;

    println!(
        "box dimension estimate: {} (fit residual {})",
        cell(est.slope),
        cell(est.residual)
    );
    let mut csv = Csv::new(&["scale", "count"]);
    for (r, n) in est.scales.iter().zip(&est.counts) {
        println!("scale {}: {} cells", cell(*r), n);
        csv.row(&[cell(*r), n.to_string()]);
    }
    let results = json!({
        "scales": est.scales,
        "counts": est.counts,
        "slope": est.slope,
        "residual": est.residual,
    });
    finish("boxdim", &loaded, &a.out, Vec::new(), results, csv)
}

/// Exhaustively checks the sandwich bound on every vertex chain up to
/// `depth`: the chain measure over the product of its pressure weights
/// must lie between the Perron-vector extremes. Chains with a zero weight
/// must have measure exactly zero.
fn sandwich_check(mm: &MarkovMeasure, depth: usize) -> (usize, bool) {
    let q = mm.vertex_count();
    let (c1, c2) = mm.sandwich_constants();
    let mut checked = 0usize;
    for len in 1..=depth {
        let mut chain = vec![0usize; len];
        'chains: loop {
            let mu = mm.chain_measure(&chain).expect("chain vertices in range");
            let weight: f64 = chain.windows(2).map(|p| mm.weight(p[0], p[1])).product();
            if weight > 0.0 {
                let ratio = mu / weight;
                if !(ratio >= c1 * (1.0 - 1e-9) && ratio <= c2 * (1.0 + 1e-9)) {
                    return (checked, false);
                }
            } else if mu != 0.0 {
                return (checked, false);
            }
            checked += 1;
            let mut pos = len;
            loop {
                if pos == 0 {
                    break 'chains;
                }
                pos -= 1;
                chain[pos] += 1;
                if chain[pos] < q {
                    break;
                }
                chain[pos] = 0;
            }
        }
    }
    (checked, true)
}

fn cmd_gdifs(a: GdifsArgs) -> Result<(), CliError> {
    let loaded = load(&a.config)?;
    let g = loaded.config.to_gdifs()?;
    let settings = loaded.config.settings();
    let budget = budget_for(settings)?;
    let seed = a.seed.or(settings.seed).unwrap_or(7);

    let ne = natural_exponent(&g).map_err(compute_err)?;
    let mm = markov_measure(&g).map_err(compute_err)?;
    let (c1, c2) = mm.sandwich_constants();
    let sim = simulate_entropy(&g, &mm, SIM_STEPS, seed).map_err(compute_err)?;

    let q = g.vertex_count() as u128;
    let chain_total: u128 = (1..=SANDWICH_DEPTH as u32).map(|k| q.pow(k)).sum();
    let mut warnings = Vec::new();
    let sandwich = if chain_total <= budget as u128 {
        let (chains, pass) = sandwich_check(&mm, SANDWICH_DEPTH);
        Some((chains, pass))
    } else {
        warnings.push(format!(
            "sandwich check skipped: {chain_total} chains exceed the budget {budget}"
        ));
        None
    };

    let deviation = if sim.std_error > 0.0 {
        (sim.estimate - mm.entropy).abs() / sim.std_error
    } else {
        0.0
    };

    println!(
        "natural exponent: {}{}",
        cell(ne.alpha),
        if ne.degenerate { " (degenerate)" } else { "" }
    );
    println!(
        "entropy: {}  lyapunov: {}  ratio: {}",
        cell(mm.entropy),
        cell(mm.lyapunov),
        cell(mm.entropy / mm.lyapunov)
    );
    println!("sandwich constants: [{}, {}]", cell(c1), cell(c2));
    if let Some((chains, pass)) = sandwich {
        println!(
            "sandwich check to depth {SANDWICH_DEPTH}: {} ({chains} chains)",
            if pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "simulated entropy: {} (std error {}, {} steps, seed {seed})",
        cell(sim.estimate),
        cell(sim.std_error),
        sim.steps
    );

    let mut csv = Csv::new(&["from", "to", "r", "t", "probability"]);
    for (e, p) in g.edges().iter().zip(&mm.edge_probability) {
        csv.row(&[
            (e.source + 1).to_string(),
            (e.target + 1).to_string(),
            cell(e.r),
            cell(e.t),
            cell(*p),
        ]);
    }
    let results = json!({
        "alpha": ne.alpha,
        "radius": ne.radius,
        "degenerate": ne.degenerate,
        "entropy": mm.entropy,
        "lyapunov": mm.lyapunov,
        "entropyOverLyapunov": mm.entropy / mm.lyapunov,
        "stationary": mm.stationary,
        "edgeProbabilities": mm.edge_probability,
        "sandwich": {
            "c1": c1,
            "c2": c2,
            "checkDepth": SANDWICH_DEPTH,
            "checkedChains": sandwich.map(|(n, _)| n),
            "pass": sandwich.map(|(_, p)| p),
        },
        "simulation": {
            "estimate": sim.estimate,
            "stdError": sim.std_error,
            "steps": sim.steps,
            "seed": seed,
            "deviationInStdErrors": deviation,
        },
    });
    finish("gdifs", &loaded, &a.out, warnings, results, csv)
}

fn cmd_scan(a: ScanArgs) -> Result<(), CliError> {
    let loaded = load(&a.config)?;
    let sys = loaded.config.to_cplifs()?;

    let (ax1_text, ax2_text) = split_pair(&a.axes, "--axes")?;
    let axis1 = Axis::parse(ax1_text.trim()).map_err(|e| CliError::Usage(e.to_string()))?;
    let axis2 = Axis::parse(ax2_text.trim()).map_err(|e| CliError::Usage(e.to_string()))?;
    let (lo_text, hi_text) = split_pair(&a.range, "--range")?;
    let lo: f64 = lo_text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--range start {lo_text:?} is not a number")))?;
    let hi: f64 = hi_text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--range end {hi_text:?} is not a number")))?;

    let res = scan_regularity(&sys, &axis1, &axis2, (lo, hi), a.grid, a.max_order, a.probe_depth)
        .map_err(scan_err)?;

    println!(
        "grid {0}x{0} over [{1}, {2}]^2, axes {3} x {4}",
        res.grid_size,
        cell(res.lo),
        cell(res.hi),
        res.axis1,
        res.axis2
    );
    println!(
        "irregular: {} cells (fraction {}), undetermined: {}",
        res.irregular_count,
        cell(res.irregular_fraction),
        res.undetermined_count
    );
    for (h, count) in &res.mesh_counts {
        println!("flagged cells at size {}: {}", cell(*h), count);
    }

    let mut csv = Csv::new(&["i", "j", "value1", "value2", "flag"]);
    for i in 0..res.grid_size {
        let v1 = res.lo + (i as f64 + 0.5) * res.cell_size;
        for j in 0..res.grid_size {
            let v2 = res.lo + (j as f64 + 0.5) * res.cell_size;
            let flag = match res.flag(i, j) {
                CellFlag::Regular => "R",
                CellFlag::Irregular => "I",
                CellFlag::Undetermined => "U",
            };
            csv.row(&[
                i.to_string(),
                j.to_string(),
                cell(v1),
                cell(v2),
                flag.to_string(),
            ]);
        }
    }

    let flag_rows: Vec<String> = (0..res.grid_size)
        .map(|i| {
            (0..res.grid_size)
                .map(|j| match res.flag(i, j) {
                    CellFlag::Regular => 'R',
                    CellFlag::Irregular => 'I',
                    CellFlag::Undetermined => 'U',
                })
                .collect()
        })
        .collect();
    let results = json!({
        "axis1": res.axis1.to_string(),
        "axis2": res.axis2.to_string(),
        "range": [res.lo, res.hi],
        "gridSize": res.grid_size,
        "cellSize": res.cell_size,
        "membershipTol": res.membership_tol,
        "seed": a.seed,
        "irregularCount": res.irregular_count,
        "undeterminedCount": res.undetermined_count,
        "irregularFraction": res.irregular_fraction,
        "meshCounts": res.mesh_counts.iter()
            .map(|&(h, n)| json!([h, n]))
            .collect::<Vec<_>>(),
        "flags": flag_rows,
        "witnesses": res.witnesses.iter().map(|w| json!({
            "cell": [w.cell.0, w.cell.1],
            "map": w.map + 1,
            "breakpoint": w.breakpoint + 1,
            "value": w.value,
            "certified": w.certified,
            "word": w.word.as_ref().map(|word| word_json(word)),
        })).collect::<Vec<_>>(),
    });
    finish("scan", &loaded, &a.out, Vec::new(), results, csv)
}

fn parse_scales(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let v: f64 = part.trim().parse().map_err(|_| {
            CliError::Usage(format!("--scales entry {part:?} is not a number"))
        })?;
        if !(v > 0.0 && v < 1.0) {
            return Err(CliError::Usage(format!(
                "--scales entry {v} must lie in (0, 1)"
            )));
        }
        out.push(v);
    }
    if out.len() < 2 {
        return Err(CliError::Usage("--scales needs at least two entries".into()));
    }
    Ok(out)
}

fn split_pair<'a>(text: &'a str, flag: &str) -> Result<(&'a str, &'a str), CliError> {
    text.split_once(',').ok_or_else(|| {
        CliError::Usage(format!("{flag} needs two comma-separated values"))
    })
}
