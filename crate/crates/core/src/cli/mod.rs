//! Command-line front end. Every subcommand composes library calls and writes
//! CSV or JSON artifacts plus a JSON summary on standard output.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

pub use output::{curve_csv, emit_curve_csv, format_sig, table_csv};

/// Default directory for relative output paths and default file names.
pub const OUTPUT_DIR_ENV: &str = "APLORDER_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "aplorder", version, about = "Extreme portfolio loss diversification and ordering")]
struct Cli {
    /// JSON file with default values for any flag; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Diversification curve of a model over a portfolio grid.
    Curve(RunConfig),
    /// Compare two models in the spectral order (and optionally the portfolio loss order).
    Order(RunConfig),
    /// Canonicalize a spectral measure given as JSON atoms or a model.
    Canonicalize(RunConfig),
    /// Tail estimates on a simulated or loaded sample cloud.
    Estimate(RunConfig),
    /// Simulate a sample cloud and write it as CSV.
    Simulate(RunConfig),
    /// Check the dependence bounds of a model's curve.
    Bounds(RunConfig),
}

/// Flags shared by all subcommands. The same keys are accepted in a JSON
/// config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Model family (gumbel, galambos, independent, comonotone, elliptical) or family:param.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Correlation of the bivariate elliptical model.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Dimension for independent/comonotone models and samplers.
    #[arg(long = "d")]
    pub d: Option<usize>,
    /// Tail index; several values give several curves.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    /// Tail index of the right-hand model when it differs.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_right: Option<f64>,
    /// Number of bivariate grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Lattice step count for d >= 3 grids.
    #[arg(long)]
    pub lattice: Option<usize>,
    /// figure1a..figure1d (Gumbel) or figure2a..figure2d (elliptical).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub left: Option<String>,
    #[arg(long)]
    pub right: Option<String>,
    /// Marginal tail ratios lambda_i of left against right.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Ordering or validation tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample size.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Number of upper order statistics.
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// First portfolio weights xi1 of bivariate portfolios.
    #[arg(long, value_delimiter = ',')]
    pub xi: Vec<f64>,
    /// Quantile levels for tail ratios.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    /// Thresholds for stop-loss comparisons.
    #[arg(long = "u", value_delimiter = ',')]
    pub u: Vec<f64>,
    /// Atoms used to discretize density measures.
    #[arg(long)]
    pub atoms: Option<usize>,
}

impl RunConfig {
    /// Fills every unset field from `file`.
    pub fn merged_with(self, file: RunConfig) -> RunConfig {
        fn vec_or(a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
            if a.is_empty() {
                b
            } else {
                a
            }
        }
        RunConfig {
            model: self.model.or(file.model),
            theta: self.theta.or(file.theta),
            rho: self.rho.or(file.rho),
            d: self.d.or(file.d),
            alpha: vec_or(self.alpha, file.alpha),
            alpha_right: self.alpha_right.or(file.alpha_right),
            grid: self.grid.or(file.grid),
            lattice: self.lattice.or(file.lattice),
            preset: self.preset.or(file.preset),
            left: self.left.or(file.left),
            right: self.right.or(file.right),
            lambda: vec_or(self.lambda, file.lambda),
            tol: self.tol.or(file.tol),
            quad_tol: self.quad_tol.or(file.quad_tol),
            input: self.input.or(file.input),
            out: self.out.or(file.out),
            seed: self.seed.or(file.seed),
            n: self.n.or(file.n),
            k: self.k.or(file.k),
            xi: vec_or(self.xi, file.xi),
            levels: vec_or(self.levels, file.levels),
            u: vec_or(self.u, file.u),
            atoms: self.atoms.or(file.atoms),
        }
    }
}

/// Output path: relative paths are placed under `$APLORDER_OUTPUT_DIR` when
/// it is set; without `--out` the default name is used only in that directory.
pub(crate) fn resolve_out(out: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match (out, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => Some(d.join(default_name)),
        (None, None) => None,
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run_with_output<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let _ = writeln!(out, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs the CLI with the process arguments and standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_output(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    // an optional "command" key documents the intended subcommand
    if let Some(obj) = value.as_object_mut() {
        obj.remove("command");
    }
    Ok(serde_json::from_value(value)?)
}

fn dispatch(cli: Cli) -> Result<serde_json::Value> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let (name, cfg) = match cli.command {
        Command::Curve(c) => ("curve", c),
        Command::Order(c) => ("order", c),
        Command::Canonicalize(c) => ("canonicalize", c),
        Command::Estimate(c) => ("estimate", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Bounds(c) => ("bounds", c),
    };
    let cfg = cfg.merged_with(file);
    let (result, outputs) = match name {
        "curve" => commands::curve(&cfg)?,
        "order" => commands::order(&cfg)?,
        "canonicalize" => commands::canonicalize(&cfg)?,
        "estimate" => commands::estimate(&cfg)?,
        "simulate" => commands::simulate(&cfg)?,
        _ => commands::bounds(&cfg)?,
    };
    let outputs: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
    Ok(json!({
        "command": name,
        "version": crate::VERSION,
        "input": cfg,
        "result": result,
        "outputs": outputs,
    }))
}
