use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;
mod output;

#[derive(Parser, Debug)]
#[command(
    name = "looptop",
    version,
    about = "Extended persistence features and topology-aware link prediction on graphs"
)]
struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a stochastic block model graph with random node features.
    Sbm(SbmArgs),
    /// Extended persistence diagram of a node pair's enclosing subgraph, or
    /// of a whole graph under an explicit filter.
    Diagram(DiagramArgs),
    /// Persistence images for node pairs.
    Image(ImageArgs),
    /// Ollivier-Ricci curvature of every edge.
    Ricci(RicciArgs),
    /// Time the reduction and the fast algorithm on random graphs.
    Bench(BenchArgs),
    /// Train and evaluate the link predictor.
    Train(TrainArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct OutArg {
    /// Output directory, created if missing.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SbmArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of communities.
    #[arg(long = "c", visible_alias = "communities")]
    pub communities: usize,
    /// Intra-community edge probability.
    #[arg(long)]
    pub p: f64,
    /// Inter-community edge probability.
    #[arg(long)]
    pub q: f64,
    /// Feature dimension.
    #[arg(long = "d", visible_alias = "feature-dim", default_value_t = 0)]
    pub feature_dim: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArg,
}

#[derive(Args, Debug, Serialize)]
pub struct PairArgs {
    /// Vicinity radius; defaults to 1 on dense graphs, 2 otherwise.
    #[arg(long)]
    pub k: Option<usize>,
    /// Distance inside the filter: hop or ricci.
    #[arg(long, default_value = "hop")]
    pub metric: String,
    /// Idleness of the random walk used by the Ricci metric.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Keep the edge between the targets in their subgraph.
    #[arg(long)]
    pub keep_target_edge: bool,
    /// Keep points with zero persistence.
    #[arg(long)]
    pub keep_zero: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct DiagramArgs {
    /// Edge list file.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, required_unless_present = "filter")]
    pub u: Option<usize>,
    #[arg(long, required_unless_present = "filter")]
    pub v: Option<usize>,
    /// Node values, one per line; the diagram is then taken on the whole
    /// graph and the pair options are ignored.
    #[arg(long, conflicts_with_all = ["u", "v"])]
    pub filter: Option<PathBuf>,
    /// fast, reduction or both.
    #[arg(long, default_value = "both")]
    pub algo: String,
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArg,
}

#[derive(Args, Debug, Serialize)]
pub struct ImageArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Pairs file, one `u v` per line. Defaults to every edge of the graph.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Grid as ROWSxCOLS.
    #[arg(long, default_value = "5x5")]
    pub resolution: String,
    /// absolute or literal.
    #[arg(long, default_value = "absolute")]
    pub transform: String,
    /// Worker threads for the per-pair stage.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArg,
}

#[derive(Args, Debug, Serialize)]
pub struct RicciArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArg,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    /// Number of random graphs.
    #[arg(long, default_value_t = 20)]
    pub graphs: usize,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 1500)]
    pub m: usize,
    /// Timed runs per graph and algorithm.
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArg,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Feature CSV, one row per node.
    #[arg(long)]
    pub features: PathBuf,
    /// Flat TOML file of settings; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Replace every persistence image by zeros.
    #[arg(long)]
    pub ablate_topology: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sbm(a) => commands::sbm(a, cli.seed),
        Command::Diagram(a) => commands::diagram(a, cli.seed),
        Command::Image(a) => commands::image(a, cli.seed),
        Command::Ricci(a) => commands::ricci(a, cli.seed),
        Command::Bench(a) => commands::bench(a, cli.seed),
        Command::Train(a) => commands::train(a, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
