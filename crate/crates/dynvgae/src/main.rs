use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynvgae::commands::{cmd_eval, cmd_gen, cmd_sweep, cmd_train};
use dynvgae::{AppError, RunConfig, Settings};

#[derive(Parser)]
#[command(
    name = "dynvgae",
    version,
    about = "Jointly trained variational graph autoencoders for dynamic graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dynamic SBM dataset (edges.txt, labels.txt).
    Gen(GenArgs),
    /// Train one autoencoder per snapshot and export embeddings.
    Train(TrainArgs),
    /// Evaluate exported embeddings on lp, nc and rec tasks.
    Eval(EvalArgs),
    /// Train and evaluate over a grid of gamma values.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Number of communities.
    #[arg(long, alias = "communities")]
    k: Option<usize>,
    #[arg(long)]
    p_in: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    /// Number of snapshots.
    #[arg(long = "T")]
    snapshots: Option<usize>,
    #[arg(long)]
    churn: Option<f64>,
    #[arg(long, alias = "data-seed")]
    seed: Option<u64>,
}

#[derive(Args)]
struct DataArgs {
    /// `src dst timestamp` edge list.
    #[arg(long)]
    edge_file: Option<PathBuf>,
    /// `node label [t]` lines.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Node feature file; identity features when absent.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Snapshot width in timestamp units.
    #[arg(long)]
    window: Option<u64>,
    /// Each snapshot holds all edges up to its window.
    #[arg(long)]
    cumulative: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    communities: Option<usize>,
    #[arg(long)]
    p_in: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    #[arg(long = "T")]
    snapshots: Option<usize>,
    #[arg(long)]
    churn: Option<f64>,
    /// Seed of the synthetic generator (defaults to --seed).
    #[arg(long)]
    data_seed: Option<u64>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of prior snapshots in the smoothness window.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    sigma_rw: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    latent: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// fresh or fixed.
    #[arg(long)]
    strategy: Option<String>,
    /// mean or sample.
    #[arg(long)]
    anchor: Option<String>,
    #[arg(long)]
    self_loops: Option<bool>,
    /// entries or nodes.
    #[arg(long)]
    kl_norm: Option<String>,
    #[arg(long)]
    decoder_cap: Option<usize>,
    /// One thread per snapshot within each epoch (fixed strategy).
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Train only this snapshot, on its own.
    #[arg(long)]
    snapshot: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of lp, nc, rec.
    #[arg(long)]
    tasks: Option<String>,
    /// Recommendation cutoffs, e.g. 2..10.
    #[arg(long)]
    k: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated gamma grid.
    #[arg(long)]
    gammas: Option<String>,
    #[arg(long)]
    tasks: Option<String>,
    #[arg(long)]
    k: Option<String>,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, AppError> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        flags.set_opt("out", self.out.as_ref().map(|p| p.display()));
        s.merge(&flags);
        Ok(s)
    }
}

impl DataArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("edge_file", self.edge_file.as_ref().map(|p| p.display()));
        s.set_opt("labels", self.labels.as_ref().map(|p| p.display()));
        s.set_opt("features", self.features.as_ref().map(|p| p.display()));
        s.set_opt("window", self.window);
        if self.cumulative {
            s.set("cumulative", true);
        }
        s.set_opt("n", self.n);
        s.set_opt("communities", self.communities);
        s.set_opt("p_in", self.p_in);
        s.set_opt("p_out", self.p_out);
        s.set_opt("T", self.snapshots);
        s.set_opt("churn", self.churn);
        s.set_opt("data_seed", self.data_seed);
    }
}

impl ModelArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("gamma", self.gamma);
        s.set_opt("l", self.l);
        s.set_opt("sigma_rw", self.sigma_rw);
        s.set_opt("hidden", self.hidden);
        s.set_opt("latent", self.latent);
        s.set_opt("epochs", self.epochs);
        s.set_opt("lr", self.lr);
        s.set_opt("seed", self.seed);
        s.set_opt("strategy", self.strategy.as_ref());
        s.set_opt("anchor", self.anchor.as_ref());
        s.set_opt("self_loops", self.self_loops);
        s.set_opt("kl_norm", self.kl_norm.as_ref());
        s.set_opt("decoder_cap", self.decoder_cap);
        if self.parallel {
            s.set("parallel", true);
        }
    }
}

fn run(cli: Cli) -> Result<String, AppError> {
    match cli.command {
        Command::Gen(a) => {
            let mut s = a.common.settings()?;
            s.set_opt("n", a.n);
            s.set_opt("communities", a.k);
            s.set_opt("p_in", a.p_in);
            s.set_opt("p_out", a.p_out);
            s.set_opt("T", a.snapshots);
            s.set_opt("churn", a.churn);
            s.set_opt("data_seed", a.seed);
            cmd_gen(&RunConfig::from_settings(&s)?)
        }
        Command::Train(a) => {
            let mut s = a.common.settings()?;
            a.data.apply(&mut s);
            a.model.apply(&mut s);
            s.set_opt("snapshot", a.snapshot);
            cmd_train(&RunConfig::from_settings(&s)?)
        }
        Command::Eval(a) => {
            let mut s = a.common.settings()?;
            a.data.apply(&mut s);
            s.set_opt("seed", a.seed);
            s.set_opt("tasks", a.tasks);
            s.set_opt("k", a.k);
            cmd_eval(&RunConfig::from_settings(&s)?)
        }
        Command::Sweep(a) => {
            let mut s = a.common.settings()?;
            a.data.apply(&mut s);
            a.model.apply(&mut s);
            s.set_opt("gammas", a.gammas);
            s.set_opt("tasks", a.tasks);
            s.set_opt("k", a.k);
            cmd_sweep(&RunConfig::from_settings(&s)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
