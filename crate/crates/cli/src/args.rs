use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::files::ModeName;

/// Gradient-descent shaped state feedback: synthesis, LQR bridge,
/// heavy-ball momentum and closed-loop simulation.
#[derive(Debug, Parser)]
#[command(name = "gdtraj", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a static gain with A + BK = I − 2ΓP.
    Synth {
        problem: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        shaping: Shaping,
    },
    /// Solve the Riccati equation and map the LQR gain to Γ̄.
    Lqr {
        problem: PathBuf,
        output: PathBuf,
        /// Initial state for the reported optimal cost.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
    },
    /// Design a two-step (heavy-ball) policy u = K₁x_k + K₂x_{k−1}.
    Hb {
        problem: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        shaping: Shaping,
        /// Weight μ of the delayed state in V̄ = xᵀPx + μx₋ᵀPx₋.
        #[arg(long)]
        delay_weight: Option<f64>,
    },
    /// Recompute every invariant of a design against a problem.
    Check { design: PathBuf, problem: PathBuf },
    /// Simulate a design and write the trajectory (CSV, or JSON for *.json).
    Sim {
        design: PathBuf,
        problem: PathBuf,
        output: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        /// Add the descent-angle column.
        #[arg(long)]
        angles: bool,
        /// Level-set values written to <output>.levels.csv.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
    },
    /// Compare cost, spectral radius, margin and descent angle of two designs.
    Compare {
        first: PathBuf,
        second: PathBuf,
        problem: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct Shaping {
    /// Contraction rate λ in (0, 1].
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub gamma_mode: Option<ModeName>,
    /// JSON matrix U for sym(Γ) ⪯ U (implies bounded mode).
    #[arg(long)]
    pub gamma_bound: Option<PathBuf>,
    /// JSON matrix, or a design file's Γ / Γ̄, for fixed mode (implies fixed mode).
    #[arg(long)]
    pub gamma_value: Option<PathBuf>,
}
