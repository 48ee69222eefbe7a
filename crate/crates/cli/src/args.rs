use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lensrr", version, about = "Sharp norms of the monotone rearrangement on dyadic classes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Class {
    Bmo,
    A2,
    Ap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LensKind {
    Parabolic,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Geometry,
    Functions,
    Martingales,
    Witnesses,
}

/// Filtration ratio: `--alpha`, or `2^-n` from `--n`.
#[derive(Debug, Clone, clap::Args)]
pub struct Ratio {
    /// Dimension of the cube; sets alpha = 2^-n.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sharp constant of the rearrangement for a class.
    #[command(allow_negative_numbers = true)]
    Constant {
        #[arg(long)]
        class: Class,
        #[command(flatten)]
        ratio: Ratio,
        #[arg(long = "Q")]
        q_const: Option<f64>,
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
    },
    /// Minimal alpha-extension of a lens, with optional envelope check and plots.
    #[command(allow_negative_numbers = true)]
    Extend {
        #[arg(long)]
        lens: LensKind,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "C")]
        c: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        alpha: f64,
        /// Cross-check the closed form against the numeric envelope.
        #[arg(long)]
        check: bool,
        /// Write the envelope as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write an SVG plot of the lens, higher segments and extension.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Rearrange a dyadic step function read from JSON.
    #[command(allow_negative_numbers = true)]
    Rearrange {
        /// DyadicStepFunction JSON, or a witness report.
        #[arg(long)]
        input: PathBuf,
        /// Where to write the rearranged StepFunction1D JSON.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "bmo")]
        class: Class,
        #[arg(long = "Q", default_value_t = 1.0)]
        q_const: f64,
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
    },
    /// Extremal witness for BMO or A_2.
    #[command(allow_negative_numbers = true)]
    Witness {
        #[arg(long)]
        class: Class,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long = "Q")]
        q_const: Option<f64>,
        /// Also write the report to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a property suite; exit 1 if any property fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}
