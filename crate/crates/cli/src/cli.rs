use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hypersis::Backend;

use crate::config::Model;

#[derive(Debug, Parser)]
#[command(name = "hypersis", version, about = "SIS contagion on hypergraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random hypergraph and save it as JSON.
    Generate(GenerateArgs),
    /// Evaluate the spectral stability conditions.
    Threshold(ThresholdArgs),
    /// Run models at a single (beta, i0) point.
    Simulate(SimulateArgs),
    /// Run an experiment from a config file or a preset.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    /// Edge counts by size, e.g. `2:400,3:200`.
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tag every hyperedge with family `size - 1`.
    #[arg(long, value_parser = ["by-size"])]
    pub families: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// One kernel for every hyperedge: identity, arctan, log1p[:a], min:c,
    /// threshold:c1,c2 or table:f0,f1,...[;concave].
    #[arg(long, conflicts_with_all = ["size_kernel", "family_kernel"])]
    pub kernel: Option<String>,
    /// Kernel for hyperedges of one size, as `size=spec`; repeatable.
    #[arg(long = "size-kernel", value_name = "SIZE=SPEC", conflicts_with = "family_kernel")]
    pub size_kernel: Vec<String>,
    /// Kernel for one family tag of the input file, as `family=spec`; repeatable.
    #[arg(long = "family-kernel", value_name = "FAMILY=SPEC")]
    pub family_kernel: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub hypergraph: PathBuf,
    #[command(flatten)]
    pub kernels: KernelArgs,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    match s {
        "discretized" => Ok(Backend::Discretized),
        "event-driven" | "event_driven" => Ok(Backend::EventDriven),
        _ => Err(format!("unknown backend `{s}` (discretized, event-driven)")),
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub hypergraph: PathBuf,
    #[command(flatten)]
    pub kernels: KernelArgs,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long)]
    pub i0: f64,
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long, default_value_t = hypersis::meanfield::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_backend, default_value = "discretized")]
    pub backend: Backend,
    #[arg(long, value_delimiter = ',', default_value = "exact,mf_integer,mf_commuted")]
    pub models: Vec<Model>,
    /// Write every node's probability instead of the prevalence.
    #[arg(long)]
    pub per_node: bool,
    /// Keep every `stride`-th mean-field step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON config file.
    #[arg(conflicts_with = "preset", required_unless_present_any = ["preset", "list_presets"])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Print the preset names and exit.
    #[arg(long)]
    pub list_presets: bool,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
