//! Command-line arguments, TOML overrides and validation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "twh", version, about = "Higher-order Tracy-Widom distributions")]
pub struct Cli {
    /// TOML file whose keys override the corresponding flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hierarchy equations.
    Pii {
        #[command(subcommand)]
        action: PiiAction,
    },
    /// Table of F(s) and ln det on an s-grid by one route.
    Tw(TwArgs),
    /// Cross-route deviations on an s-grid.
    Compare(CompareArgs),
    /// The Airy constant and the k = 1 constant estimate.
    Constants(ConstantsArgs),
}

#[derive(Subcommand, Debug)]
pub enum PiiAction {
    /// Prints the n-th member of the hierarchy.
    Print(PiiPrintArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fredholm,
    Painleve,
    Asymptotic,
    /// k = 0 only: the integral of the Hastings–McLeod solution.
    #[value(name = "tw-integral")]
    #[serde(rename = "tw-integral")]
    TwIntegral,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fredholm => "fredholm",
            Method::Painleve => "painleve",
            Method::Asymptotic => "asymptotic",
            Method::TwIntegral => "tw-integral",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiiPrintArgs {
    #[arg(long)]
    pub n: usize,
    /// LaTeX instead of plain text.
    #[arg(long)]
    pub latex: bool,
}

/// Grid and solver settings shared by `tw` and `compare`.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Deformation parameters t_1..t_2k (comma separated); zeros if omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
    pub s_from: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub s_to: f64,
    #[arg(long, default_value_t = 0.25)]
    pub s_step: f64,
    /// Chebyshev degree of the collocation solves.
    #[arg(long, default_value_t = 500)]
    pub degree: usize,
    /// Nyström quadrature order.
    #[arg(long, default_value_t = 120)]
    pub m: usize,
    /// Nyström mapping scale.
    #[arg(long, default_value_t = 4.0)]
    pub l: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Method::Painleve)]
    pub method: Method,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; taken from the `--out` extension if omitted, else CSV.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Routes to compare (comma separated); all available ones if omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub routes: Vec<Method>,
    /// JSON report path. Without it the report goes to standard output and
    /// the summary to standard error.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsArgs {
    /// CSV with columns `s` and `F` (as written by `tw`) instead of a sweep.
    #[arg(long)]
    pub from_samples: Option<PathBuf>,
    /// Lower end of the k = 1 sweep.
    #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 0.25)]
    pub s_step: f64,
    #[arg(long, default_value_t = 500)]
    pub degree: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Replaces fields of `args` by the keys of the TOML file at `path`.
/// Unknown keys are rejected.
pub fn apply_overrides<T: Serialize + DeserializeOwned>(args: T, path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
    let mut current = serde_json::to_value(&args).map_err(|e| CliError::Internal(e.to_string()))?;
    let fields = current.as_object_mut().ok_or_else(|| CliError::Internal("arguments are not a map".into()))?;
    for (key, value) in table {
        let key_norm = key.replace('-', "_");
        if !fields.contains_key(&key_norm) {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        let v = serde_json::to_value(value).map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))?;
        fields.insert(key_norm, v);
    }
    serde_json::from_value(Value::Object(fields.clone())).map_err(|e| CliError::Usage(format!("config: {e}")))
}

/// `s_from, s_from + h, ...` up to `s_to`.
pub fn grid_points(g: &GridArgs) -> Result<Vec<f64>, CliError> {
    if !(g.s_step > 0.0 && g.s_step.is_finite() && g.s_from.is_finite() && g.s_to.is_finite()) {
        return Err(CliError::Usage(format!("bad grid: from {} to {} step {}", g.s_from, g.s_to, g.s_step)));
    }
    if g.s_to < g.s_from {
        return Err(CliError::Usage(format!("empty s-grid: s_to {} < s_from {}", g.s_to, g.s_from)));
    }
    let count = ((g.s_to - g.s_from) / g.s_step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(CliError::Usage(format!("{count} grid points is too many")));
    }
    Ok((0..count).map(|i| g.s_from + g.s_step * i as f64).collect())
}

/// `t`, defaulting to zeros; its length must be `2k`.
pub fn deformation(g: &GridArgs) -> Result<Vec<f64>, CliError> {
    if g.t.is_empty() {
        return Ok(vec![0.0; 2 * g.k]);
    }
    if g.t.len() != 2 * g.k {
        return Err(CliError::Usage(format!("k = {} needs {} values of t, got {}", g.k, 2 * g.k, g.t.len())));
    }
    Ok(g.t.clone())
}
