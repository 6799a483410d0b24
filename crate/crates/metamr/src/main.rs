use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

mod commands;

/// Cross-lingual AMR parsing with first-order meta-learning.
///
/// Exit status: 0 on success, 2 on input or configuration errors, 3 when
/// training hits a non-finite value. Set RUST_LOG for progress output.
#[derive(Debug, Parser)]
#[command(name = "metamr", version)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score candidate graphs against gold graphs; prints "P R F1".
    Smatch(SmatchArgs),
    /// Train a model with first-order MAML or the joint baseline.
    Train(TrainArgs),
    /// k-shot evaluation of a checkpoint on a test file.
    Eval(EvalArgs),
    /// Write a synthetic language family (TSV splits plus manifest).
    GenSynthetic(GenArgs),
    /// AMR corpus file to parallel TSV with linearized graphs.
    Linearize(LinearizeArgs),
    /// Parallel TSV to AMR corpus file, repairing each linearized graph.
    Restore(IoArgs),
    /// Re-serialize an AMR corpus file in canonical form.
    Normalize(IoArgs),
    /// Merge evaluation reports into a model × k by language F1 grid.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct SmatchArgs {
    candidate: PathBuf,
    gold: PathBuf,
    #[arg(long, default_value_t = metamr_core::smatch::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write one TSV row per graph pair.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Maml,
    Joint,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// JSON run configuration; omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory with train.tsv and dev.tsv (test.tsv optional).
    #[arg(long)]
    data_dir: PathBuf,
    /// Output directory for model.ckpt and train.log.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Parallel TSV test file.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// Parallel TSV shot pool; required when k > 0.
    #[arg(long)]
    shots: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file (line-delimited JSON).
    #[arg(long)]
    out: PathBuf,
    /// Model name in the report; defaults to the checkpoint file stem.
    #[arg(long)]
    label: Option<String>,
    /// Only evaluate these languages (comma separated).
    #[arg(long, value_delimiter = ',')]
    languages: Vec<String>,
    /// Fine-tuning learning rate.
    #[arg(long, default_value_t = 1e-5)]
    lr: f64,
    /// Fine-tuning epochs over the k shots.
    #[arg(long, default_value_t = 1)]
    epochs: usize,
    #[arg(long, default_value_t = 128)]
    max_len: usize,
    #[arg(long, default_value_t = metamr_core::smatch::DEFAULT_RESTARTS)]
    restarts: usize,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// JSON synthetic spec; omitted fields take defaults.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct LinearizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Language code for rows whose record has no `# ::lang` metadata.
    #[arg(long, default_value = "en")]
    language: String,
}

#[derive(Debug, Args)]
struct IoArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, num_args = 1.., required = true)]
    reports: Vec<PathBuf>,
    /// F1 grid TSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional TSV of differences to the first model.
    #[arg(long)]
    deltas: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Command::Eval(a) = &cli.command {
        if a.k > 0 && a.shots.is_none() {
            Cli::command()
                .error(ErrorKind::MissingRequiredArgument, "--k > 0 requires --shots")
                .exit();
        }
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Smatch(a) => commands::smatch(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::GenSynthetic(a) => commands::gen_synthetic(a),
        Command::Linearize(a) => commands::linearize(a),
        Command::Restore(a) => commands::restore(a),
        Command::Normalize(a) => commands::normalize(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
