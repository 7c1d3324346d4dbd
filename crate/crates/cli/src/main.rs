//! curvelab: fundamental forms, Beltrami operators, Gauss-map eigenrelation
//! detection, identity suites, and closed-form cross-validation for a catalog
//! of parametric surfaces.
//!
//! Exit codes: 0 PASS/success, 1 FAIL, 2 INDETERMINATE, 3 usage error,
//! 4 numeric/domain error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod report;

use config::{parse_config_file, parse_f64, parse_u64, parse_usize};
use curvelab_core::finitetype::SampleStrategy;
use curvelab_core::forms::FundamentalForm;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Engine(curvelab_core::Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Engine(_) | CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Engine(_) => "engine",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Engine(e) => e.to_string(),
        }
    }
}

impl From<curvelab_core::Error> for CliError {
    fn from(e: curvelab_core::Error) -> Self {
        CliError::Engine(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "curvelab",
    version,
    about = "Differential geometry of parametric surfaces on exact jets"
)]
pub struct Cli {
    /// Key-value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Catalog surface name (see `curvelab catalog`).
    #[arg(long, global = true)]
    surface: Option<String>,

    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Major radius for the torus.
    #[arg(long = "R", global = true)]
    big_r: Option<f64>,
    /// Radial offset for the helicoid.
    #[arg(long, global = true)]
    l: Option<f64>,

    /// Fundamental form selector: I, II or III.
    #[arg(long, global = true)]
    form: Option<String>,

    /// Sampling strategy: grid or jittered-grid.
    #[arg(long, global = true)]
    strategy: Option<String>,
    #[arg(long, global = true)]
    count: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long = "tau-pass", global = true)]
    tau_pass: Option<f64>,
    #[arg(long = "tau-fail", global = true)]
    tau_fail: Option<f64>,
    #[arg(long = "k-min", global = true)]
    k_min: Option<f64>,
    /// Immersion jet order (3 or 4).
    #[arg(long = "jet-order", global = true)]
    jet_order: Option<usize>,

    /// Output directory (falls back to $CURVELAB_OUT, then ./curvelab-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Persisted artifact formats: json, csv or both.
    #[arg(long, global = true)]
    formats: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full frame dump (forms, curvatures, symbols) at one parameter point.
    Forms {
        /// Evaluation point as "u,v".
        #[arg(long)]
        at: String,
    },
    /// Beltrami laplacian of a field at a point, or a CSV over a lattice.
    Laplacian {
        /// Field: n, x, K, H, x1..x3 or n1..n3.
        #[arg(long)]
        field: String,
        #[arg(long)]
        at: Option<String>,
        /// Lattice resolution N (N x N cell centers) for the CSV dump.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Identity battery over a sample set; exit 0 iff all pass.
    Identities {
        /// Number of sample points (default: the configured count).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Least-squares fit of the Gauss-map eigenrelation; exit code = verdict.
    Detect,
    /// Cross-validate a closed-form pipeline against the jet engine.
    Xval {
        /// Pipeline: ruled, quadric1 or quadric2.
        #[arg(long)]
        pipeline: String,
        /// Lattice resolution (default 10).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// List catalog surfaces, parameters and domains.
    Catalog,
}

fn resolve_config(cli: &Cli) -> Result<config::RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => Default::default(),
    };

    let surface_name = cli
        .surface
        .clone()
        .or_else(|| file.get("surface").cloned())
        .unwrap_or_else(|| "sphere".to_string());

    let form_str = cli
        .form
        .clone()
        .or_else(|| file.get("form").cloned())
        .unwrap_or_else(|| "II".to_string());
    let form: FundamentalForm = form_str.parse().map_err(|e| CliError::Usage(format!("{e}")))?;

    let strategy_str = cli
        .strategy
        .clone()
        .or_else(|| file.get("strategy").cloned())
        .unwrap_or_else(|| "jittered-grid".to_string());
    let strategy: SampleStrategy = strategy_str
        .parse()
        .map_err(|e| CliError::Usage(format!("{e}")))?;

    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("CURVELAB_OUT").map(PathBuf::from))
        .or_else(|| file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("curvelab-out"));

    let formats = cli
        .formats
        .clone()
        .or_else(|| file.get("formats").cloned())
        .unwrap_or_else(|| "json".to_string());
    if !matches!(formats.as_str(), "json" | "csv" | "both") {
        return Err(CliError::Usage(format!(
            "--formats must be json, csv or both (got '{formats}')"
        )));
    }

    Ok(config::RunConfig {
        surface: config::SurfaceConfig {
            name: surface_name,
            a: cli.a.or(parse_f64(&file, "a")?),
            b: cli.b.or(parse_f64(&file, "b")?),
            c: cli.c.or(parse_f64(&file, "c")?),
            r: cli.r.or(parse_f64(&file, "r")?),
            big_r: cli.big_r.or(parse_f64(&file, "R")?),
            l: cli.l.or(parse_f64(&file, "l")?),
        },
        form,
        sampling: config::SamplingConfig {
            strategy,
            count: cli.count.or(parse_usize(&file, "count")?).unwrap_or(64),
            seed: cli.seed.or(parse_u64(&file, "seed")?).unwrap_or(0),
        },
        tolerances: config::ToleranceConfig {
            tau_pass: cli.tau_pass.or(parse_f64(&file, "tau_pass")?).unwrap_or(1e-6),
            tau_fail: cli.tau_fail.or(parse_f64(&file, "tau_fail")?).unwrap_or(1e-3),
            k_min: cli.k_min.or(parse_f64(&file, "k_min")?).unwrap_or(1e-8),
            jet_order: cli
                .jet_order
                .or(parse_usize(&file, "jet_order")?)
                .unwrap_or(3),
        },
        output: config::OutputConfig {
            dir: out_dir,
            formats,
        },
    })
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            if code != 0 {
                eprintln!(
                    "{}",
                    serde_json::json!({"error": {"kind": "usage", "exit": 3, "message": e.to_string()}})
                );
            }
            return code;
        }
    };

    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };

    let result = match &cli.command {
        Command::Forms { at } => commands::cmd_forms(&cfg, at),
        Command::Laplacian { field, at, grid } => {
            commands::cmd_laplacian(&cfg, field, at.as_deref(), *grid)
        }
        Command::Identities { grid } => commands::cmd_identities(&cfg, *grid),
        Command::Detect => commands::cmd_detect(&cfg),
        Command::Xval { pipeline, grid } => commands::cmd_xval(&cfg, pipeline, grid.unwrap_or(10)),
        Command::Catalog => commands::cmd_catalog(&cfg),
    };

    match result {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> i32 {
    let code = e.exit_code();
    eprintln!(
        "{}",
        serde_json::json!({"error": {"kind": e.kind(), "exit": code, "message": e.message()}})
    );
    code
}
