use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ripjl::constructions::{BatchMode, Sampling, Variant};
use ripjl::harness::{Construction, PointsetKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "ripjl",
    version,
    about = "RIP-based Johnson-Lindenstrauss embeddings and their verification"
)]
pub struct Cli {
    /// Worker threads for Monte-Carlo work; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Embed a point set with Φ·D_ξ.
    Embed(EmbedArgs),
    /// Compute or lower-bound a restricted isometry constant.
    Rip(RipArgs),
    /// Run one of the invariant suites.
    Verify(VerifyArgs),
    /// Failure rates along m, or minimal m along ε.
    Sweep(SweepArgs),
    /// Rerun the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Embed(_) => "embed",
            Command::Rip(_) => "rip",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
            Command::Replay(_) => "replay",
        }
    }

    pub fn set_output(&mut self, path: PathBuf) {
        match self {
            Command::Embed(a) => a.output = path,
            Command::Rip(a) => a.output = Some(path),
            Command::Verify(a) => a.output = Some(path),
            Command::Sweep(a) => a.output = path,
            Command::Replay(a) => a.output = Some(path),
        }
    }

    pub fn seeds(&self) -> Option<&Seeds> {
        match self {
            Command::Embed(a) => Some(&a.seeds),
            Command::Rip(a) => Some(&a.seeds),
            Command::Verify(a) => Some(&a.seeds),
            Command::Sweep(a) => Some(&a.seeds),
            Command::Replay(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct Seeds {
    /// Seed for matrix entries, sampled rows and circulant generators.
    #[arg(long, default_value_t = 1)]
    pub matrix_seed: u64,
    /// Seed for the column signs ξ and other Rademacher draws.
    #[arg(long, default_value_t = 2)]
    pub sign_seed: u64,
    /// Seed for generated points, test vectors and sampled supports.
    #[arg(long, default_value_t = 3)]
    pub data_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionArg {
    Gaussian,
    Rademacher,
    Hadamard,
    Fourier,
    Circulant,
    /// N × N identity, for testing; implies m = N and no sign flips.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Replacement {
    With,
    Without,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Gaussian,
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ConstructionArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub construction: ConstructionArg,
    /// Row sampling for the partial Hadamard construction.
    #[arg(long, value_enum, default_value = "with")]
    pub replacement: Replacement,
    /// Generator distribution for the partial circulant construction.
    #[arg(long, value_enum, default_value = "gaussian")]
    pub variant: VariantArg,
}

impl ConstructionArgs {
    pub fn resolve(&self) -> Construction {
        let variant = match self.variant {
            VariantArg::Gaussian => Variant::Gaussian,
            VariantArg::Rademacher => Variant::Rademacher,
        };
        match self.construction {
            ConstructionArg::Gaussian => Construction::Gaussian,
            ConstructionArg::Rademacher => Construction::Rademacher,
            ConstructionArg::Hadamard => Construction::Hadamard {
                sampling: match self.replacement {
                    Replacement::With => Sampling::WithReplacement,
                    Replacement::Without => Sampling::WithoutReplacement,
                },
            },
            ConstructionArg::Fourier => Construction::Fourier,
            ConstructionArg::Circulant => Construction::Circulant { variant },
            ConstructionArg::Identity => Construction::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Direct,
    Pairwise,
}

impl ModeArg {
    pub fn resolve(self) -> BatchMode {
        match self {
            ModeArg::Direct => BatchMode::Direct,
            ModeArg::Pairwise => BatchMode::PairwiseDifferences,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct TextFormat {
    /// Skip the first line of the input.
    #[arg(long)]
    pub header: bool,
    /// Field separator; a blank separator splits on runs of whitespace.
    #[arg(long, default_value = ",")]
    pub delimiter: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// Points, one per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Embedding dimension; defaults to N for the identity construction.
    #[arg(long)]
    pub m: Option<usize>,
    /// Expected ambient dimension; checked against the input.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub construction: ConstructionArgs,
    #[arg(long, value_enum, default_value = "direct")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub seeds: Seeds,
    #[command(flatten)]
    pub format: TextFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RipArgs {
    /// Matrix rows, one per line; without it a matrix is generated.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Sparsity order.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    /// Sampled supports for the monte-carlo method.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Largest number of supports exact enumeration may visit.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub construction: ConstructionArgs,
    #[command(flatten)]
    pub seeds: Seeds,
    #[command(flatten)]
    pub format: TextFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Prop53,
    Prop54,
    Expansion,
    Tails,
    Theorem,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Rows of Φ [default: 20, or 256 for theorem].
    #[arg(long)]
    pub m: Option<usize>,
    /// Columns of Φ [default: 40, or 1024 for theorem].
    #[arg(long)]
    pub n: Option<usize>,
    /// Block size.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// Random matrices per suite.
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    /// Test vectors per matrix, or proof-term draws for theorem.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Rademacher draws per tail check, or embedding trials for theorem
    /// [default: 100000, or 200 for theorem].
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[command(flatten)]
    pub construction: ConstructionArgs,
    #[command(flatten)]
    pub seeds: Seeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisArg {
    M,
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointsetArg {
    GaussianUnit,
    Sparse,
    PairwiseCloud,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Target distortion for the m axis.
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Lower end of the minimal-m search on the ε axis.
    #[arg(long, default_value_t = 8)]
    pub m_min: usize,
    /// Upper end of the minimal-m search [default: N].
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Attach the log-log slope of minimal m against ε.
    #[arg(long)]
    pub fit: bool,
    #[arg(long, value_enum, default_value = "gaussian-unit")]
    pub pointset: PointsetArg,
    /// Support size for sparse points.
    #[arg(long, default_value_t = 8)]
    pub support: usize,
    #[arg(long, value_enum, default_value = "direct")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub construction: ConstructionArgs,
    #[command(flatten)]
    pub seeds: Seeds,
}

impl SweepArgs {
    pub fn pointset(&self) -> PointsetKind {
        match self.pointset {
            PointsetArg::GaussianUnit => PointsetKind::GaussianUnit,
            PointsetArg::Sparse => PointsetKind::Sparse {
                support: self.support,
            },
            PointsetArg::PairwiseCloud => PointsetKind::PairwiseCloud,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A manifest written next to an earlier output.
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
