//! `tailgate`: batch front end for circuit construction, screening, analytic
//! Hessians, normal modes, fidelity scans and oracle validation.

mod commands;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "tailgate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summarize the Hamiltonian at the base geometry.
    Ham(HamArgs),
    /// Build and optimize the adaptive circuit at the base geometry.
    Adapt(AdaptArgs),
    /// Screen the pool against Hamiltonian derivatives and append the tail.
    Tailgate(TailgateArgs),
    /// Analytic energy Hessian of a checkpointed circuit.
    Hessian(HessianArgs),
    /// Normal-mode frequencies from a checkpoint or a stored Hessian.
    Freq(FreqArgs),
    /// Ground-state fidelity along a displacement direction.
    Fidelity(FidelityArgs),
    /// Oracle cross-checks on a grid.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Grid manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Grid spacing in Bohr; must agree with the manifest.
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,
}

#[derive(Args, Debug)]
struct HamArgs {
    #[command(flatten)]
    common: Common,
    /// Run gauge validation and print the report.
    #[arg(long)]
    validate: bool,
}

#[derive(Args, Debug)]
struct VqeArgs {
    /// VQE gradient max-norm tolerance.
    #[arg(long = "vqe-tol")]
    vqe_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct AdaptArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    vqe: VqeArgs,
    /// Stop once the largest pool gradient is below this.
    #[arg(long)]
    selection_threshold: Option<f64>,
    #[arg(long)]
    max_gates: Option<usize>,
    /// Final all-parameter optimization to this gradient tolerance.
    #[arg(long = "polish-tol")]
    polish_tol: Option<f64>,
    /// Learning-rate growth factor after accepted steps (1 keeps it fixed).
    #[arg(long = "step-growth")]
    step_growth: Option<f64>,
    /// Upper bound on the grown learning rate.
    #[arg(long = "max-step")]
    max_step: Option<f64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
}

#[derive(Args, Debug)]
struct TailgateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Target energy-derivative order; derivatives up to order − 1 are screened.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Screening threshold (`inf` selects nothing).
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
}

#[derive(Args, Debug)]
struct HessianArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    checkpoint: PathBuf,
}

#[derive(Args, Debug)]
struct FreqArgs {
    #[command(flatten)]
    common: Common,
    /// Checkpoint to differentiate; ignored when `--hessian` is given.
    #[arg(long, required_unless_present = "hessian")]
    checkpoint: Option<PathBuf>,
    /// Previously written `hessian.json`.
    #[arg(long)]
    hessian: Option<PathBuf>,
    /// Modes below this magnitude (cm⁻¹) count as translations/rotations.
    #[arg(long, default_value_t = tailgating::normalmodes::DEFAULT_DROP_THRESHOLD)]
    drop_threshold: f64,
    /// Skip projecting out rigid-body motion.
    #[arg(long)]
    no_projection: bool,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    vqe: VqeArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Second checkpoint, scanned alongside for paired columns.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Displacement direction as signed 1-based coordinates, e.g. `6` or `2,-5`.
    #[arg(long, allow_hyphen_values = true)]
    direction: String,
    #[arg(long = "delta-min", allow_hyphen_values = true, default_value_t = 0.0)]
    delta_min: f64,
    #[arg(long = "delta-max", allow_hyphen_values = true, default_value_t = 0.0)]
    delta_max: f64,
    #[arg(long = "delta-steps", default_value_t = 1)]
    delta_steps: usize,
    /// Use the Taylor Hamiltonian of this order instead of grid points, so
    /// any δ is admissible.
    #[arg(long)]
    taylor: Option<usize>,
    /// Keep the checkpoint parameters instead of re-optimizing at each δ.
    #[arg(long)]
    fixed: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Seed for the randomized negative control.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exit status: success, numerical-quality warning, validation failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Ok,
    Warning,
    Failed,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        ExitCode::from(match o {
            Outcome::Ok => 0,
            Outcome::Warning => 1,
            Outcome::Failed => 2,
        })
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("TAILGATE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("TAILGATE_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<Outcome> {
        configure_threads()?;
        match cli.command {
            Command::Ham(a) => commands::ham(a),
            Command::Adapt(a) => commands::adapt(a),
            Command::Tailgate(a) => commands::tailgate(a),
            Command::Hessian(a) => commands::hessian_cmd(a),
            Command::Freq(a) => commands::freq(a),
            Command::Fidelity(a) => commands::fidelity_cmd(a),
            Command::Validate(a) => validate::run(a),
        }
    };
    match run() {
        Ok(o) => o.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Outcome::Failed.into()
        }
    }
}
