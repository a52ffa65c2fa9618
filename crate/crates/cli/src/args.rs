use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gnnx", version, about = "Victim GCN training and label-only extraction attacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic citation-like dataset bundle.
    Generate(GenerateArgs),
    /// Train the victim GCN on a bundle's training split.
    TrainTarget(TrainTargetArgs),
    /// Run one extraction attack against a victim.
    Attack(AttackArgs),
    /// Split a bundle into target and shadow bundles along communities.
    Split(SplitArgs),
    /// Run an attack over a range of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    CoraLike,
    CiteseerLike,
    PubmedLike,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "cora-like")]
    pub preset: Preset,
    #[arg(long, default_value_t = 600)]
    pub nodes: usize,
    /// Bundle name; defaults to the preset's.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TrainTargetArgs {
    /// Dataset bundle directory.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Attack,
    DnnBaseline,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvalArg {
    Test,
    All,
}

/// Attack settings shared by `attack` and `sweep`.
#[derive(Debug, Args)]
pub struct AttackOpts {
    /// Dataset bundle directory (the target graph).
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long = "attack-id", visible_alias = "id")]
    pub attack_id: u8,
    /// Defaults to 0.25 for attacks 0-2 and 0.10 otherwise.
    #[arg(long)]
    pub attacker_fraction: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// none, first-order or second-order.
    #[arg(long)]
    pub synthesis_mode: Option<String>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, value_enum, default_value = "attack")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "test")]
    pub eval_nodes: EvalArg,
    /// Record wall-clock seconds in the report (makes reports non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub attack: AttackOpts,
    /// Shadow bundle directory, required by attacks 3-6.
    #[arg(long)]
    pub shadow: Option<PathBuf>,
    /// Victim checkpoint; a fresh victim is trained per seed when omitted.
    #[arg(long)]
    pub victim: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Share of nodes on the target side.
    #[arg(long = "target-fraction", default_value_t = 0.5)]
    pub target_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub attack: AttackOpts,
    /// attacker_fraction, alpha, shadow_fraction or synthesis_mode.
    #[arg(long)]
    pub sweep_axis: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sweep_values: Vec<String>,
    /// Target side share of the community split used by shadow attacks.
    #[arg(long = "target-fraction", default_value_t = 0.5)]
    pub target_fraction: f64,
    #[command(flatten)]
    pub output: Output,
}
