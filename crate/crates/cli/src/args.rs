use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Spectral experiments for Moser-Trudinger type functionals on the unit sphere.
#[derive(Debug, Parser)]
#[command(name = "sphere-mt", version, propagate_version = true)]
pub struct Cli {
    /// Colatitude rings (Gauss-Legendre nodes). Overrides SPHERE_MT_GRID.
    #[arg(long, global = true)]
    pub n_theta: Option<usize>,
    /// Longitude nodes. Overrides SPHERE_MT_GRID.
    #[arg(long, global = true)]
    pub n_phi: Option<usize>,
    /// Seed for every random draw [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for independent rows (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

pub const DEFAULT_SEED: u64 = 42;

impl Cli {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the quadrature, transform and conformal invariant checks.
    Check(CheckArgs),
    /// Write a field file.
    MakeField(MakeFieldArgs),
    /// Evaluate the functionals on a field.
    Evaluate(EvaluateArgs),
    /// Tabulate I_α along a family of fields.
    Sweep(SweepArgs),
    /// Minimize I_ε over the zero-moment class.
    Minimize(MinimizeArgs),
    /// Tabulate the blow-up energy expansion.
    Expansion(ExpansionArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Degree for the transform checks.
    #[arg(long, default_value_t = 16)]
    pub l_max: usize,
    /// Also validate this field file and check the functional identities on it.
    #[arg(long)]
    pub field: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    Zero,
    BubblePair,
    Conformal,
    Random,
}

#[derive(Debug, Args)]
pub struct MakeFieldArgs {
    #[arg(long, value_enum)]
    pub kind: FieldKind,
    /// Dilation for `bubble-pair` and `conformal`.
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    /// Coefficient scale for `random`.
    #[arg(long, default_value_t = 0.5)]
    pub scale: f64,
    /// Degree for `random`.
    #[arg(long, default_value_t = 16)]
    pub l_max: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Embed the values as a JSON array instead of a binary payload.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Field file to evaluate.
    #[arg(required_unless_present = "make_bubble_pair", conflicts_with = "make_bubble_pair")]
    pub field: Option<PathBuf>,
    /// Evaluate the bubble pair with this dilation instead of a file.
    #[arg(long)]
    pub make_bubble_pair: Option<f64>,
    /// Dirichlet coefficient for I_α.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Perturbation for I_ε and the Euler-Lagrange residual.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the evaluated field.
    #[arg(long)]
    pub save_field: Option<PathBuf>,
    /// Use the JSON encoding for --save-field.
    #[arg(long)]
    pub json_field: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    BubblePair,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "bubble-pair")]
    pub family: Family,
    #[arg(long, default_value_t = 2.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 19)]
    pub steps: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.5,0.6")]
    pub alpha_list: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[arg(long, required_unless_present_any = ["continuation", "config"], conflicts_with = "continuation")]
    pub eps: Option<f64>,
    /// Strictly decreasing ε list, warm-started in order.
    #[arg(long, value_delimiter = ',')]
    pub continuation: Option<Vec<f64>>,
    /// JSON config; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub l_max: Option<usize>,
    /// zero | random | bubble-pair:T | file:PATH
    #[arg(long)]
    pub init: Option<String>,
    /// Coefficient scale for `--init random`.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    #[arg(long)]
    pub tol_grad: Option<f64>,
    #[arg(long)]
    pub tol_constraint: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the minimizer (last run of a continuation) as a field file.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
    #[arg(long)]
    pub json_field: bool,
}

#[derive(Debug, Args)]
pub struct ExpansionArgs {
    /// Planar radii R.
    #[arg(long = "R-list", alias = "r-list", value_delimiter = ',', required = true)]
    pub r_list: Vec<f64>,
    /// Bubble-pair dilations for the sphere-side columns.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub t_list: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
