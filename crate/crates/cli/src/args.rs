use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Hypo-elliptic diffusion and convection-diffusion kernels on R³⋊S².
///
/// Exit status: 0 on success, 2 for invalid flags or unreadable/mismatched
/// inputs, 3 for numerical failures. Set KERNELS_THREADS to fix the number of
/// worker threads. Every output gets a `<out>.manifest.json` that `replay`
/// can re-run.
#[derive(Debug, Parser)]
#[command(name = "kernels", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact (or log-approximated) kernel on a spatial grid.
    Kernel(KernelArgs),
    /// Random-walk histogram of a process.
    Montecarlo(MonteCarloArgs),
    /// Shift-twist convolution of an orientation-sampled field with a kernel.
    Enhance(EnhanceArgs),
    /// Glyph field mesh (OBJ) of a spatial field.
    Glyphs(GlyphArgs),
    /// Spheroidal eigenvalue curves and branch points (CSV).
    Eigencurves(CurveArgs),
    /// Print the header of a field file as JSON.
    Header(HeaderArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessArg {
    Diffusion,
    Completion,
    Elliptic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    Default,
    Eigen,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    /// Fourier synthesis of the exact kernel.
    Exact,
    /// Closed-form logarithmic approximation (diffusion only).
    Approx,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProcessFlags {
    #[arg(long, value_enum, default_value = "diffusion")]
    pub process: ProcessArg,
    /// Spatial diffusivity along n.
    #[arg(long, default_value_t = 1.0)]
    pub d33: f64,
    /// Angular diffusivity.
    #[arg(long, default_value_t = 0.1)]
    pub d44: f64,
    /// Isotropic spatial diffusivity (elliptic process only).
    #[arg(long)]
    pub d11: Option<f64>,
    /// Fixed travel time.
    #[arg(long, conflicts_with = "alpha")]
    pub t: Option<f64>,
    /// Rate of a Gamma-distributed travel time.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Shape of the Gamma travel time; 1 gives the resolvent.
    #[arg(long, default_value_t = 1, requires = "alpha")]
    pub gamma_k: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    pub process: ProcessFlags,
    /// Angular truncation.
    #[arg(long, default_value_t = 12)]
    pub lmax: usize,
    /// Half-width N of the frequency grid; the spatial grid is (2N+1)³.
    #[arg(long, default_value_t = 32)]
    pub grid_n: usize,
    /// Frequency range factor: |ω| ≤ ηπ per axis.
    #[arg(long, default_value_t = 8.0)]
    pub grid_eta: f64,
    #[arg(long, value_enum, default_value = "default")]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: BackendArg,
    /// Approximation backend: weight of the spatial coefficients.
    #[arg(long, default_value_t = 16.0)]
    pub xi: f64,
    /// Approximation backend: evaluate at time t / time_scale.
    #[arg(long, default_value_t = 1.0)]
    pub time_scale: f64,
    /// Store orientation samples on this icosahedral refinement instead of
    /// SH coefficients. The approximation backend always samples (default 3).
    #[arg(long)]
    pub sampling: Option<usize>,
    /// Also measure rotation and inversion symmetry violations.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularStepArg {
    Generator,
    Halved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompletionStepArg {
    Linear,
    SquareRoot,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub process: ProcessFlags,
    #[arg(long)]
    pub walks: usize,
    /// Steps per walk.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spatial bins per axis.
    #[arg(long, default_value_t = 33)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.125)]
    pub voxel_size: f64,
    /// Icosahedral refinement of the orientation cells.
    #[arg(long, default_value_t = 3)]
    pub sphere_refinement: usize,
    #[arg(long, value_enum, default_value = "generator")]
    pub angular_step: AngularStepArg,
    #[arg(long, value_enum, default_value = "linear")]
    pub completion_step: CompletionStepArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnhanceArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlyphArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Draw every `spacing`-th voxel per axis.
    #[arg(long, default_value_t = 1)]
    pub spacing: usize,
    /// Multiplier on the automatic glyph size.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Icosahedral refinement of the glyph mesh.
    #[arg(long, default_value_t = 2)]
    pub refinement: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorArg {
    Swe,
    Gswe,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub rho_max: f64,
    /// Number of ρ intervals.
    #[arg(long, default_value_t = 200)]
    pub n_rho: usize,
    #[arg(long, default_value_t = 8)]
    pub n_curves: usize,
    #[arg(long, value_enum, default_value = "gswe")]
    pub operator: OperatorArg,
    /// Bisection tolerance of the branch-point scan.
    #[arg(long, default_value_t = 1e-4)]
    pub resolution: f64,
    /// CSV output; branch points go to `<out>.branch.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeaderArgs {
    pub file: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
