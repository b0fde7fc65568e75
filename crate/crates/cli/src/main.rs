mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use egoprior::pipeline::Task;

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "egoprior", version, about = "Egocentric object saliency from RGBD frames")]
struct Cli {
    /// TOML file of defaults; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stereo depth from a rectified pair, written as 16-bit millimeters.
    Depth(DepthArgs),
    /// Candidate object regions of one frame, one mask PNG each.
    Propose(ProposeArgs),
    /// Feature rows of one frame as CSV.
    Features(FeaturesArgs),
    /// Trains a task model, optionally holding one sequence out.
    Train(TrainArgs),
    /// Saliency heatmap of one dataset frame.
    Predict(PredictArgs),
    /// Future-saliency heatmap of one dataset frame.
    Future(FutureArgs),
    /// Prints `sight` or `touch` for one dataset frame.
    Interact(InteractArgs),
    /// MF/AP report from predicted heatmaps and ground-truth masks.
    Eval(EvalArgs),
    /// Mean feature importance of the 8 feature groups.
    Importance(ImportanceArgs),
    /// Writes a synthetic RGBD dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long, value_name = "PNG")]
    pub left: PathBuf,
    #[arg(long, value_name = "PNG")]
    pub right: PathBuf,
    /// Largest disparity searched, in pixels.
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Pyramid levels.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Focal length in pixels.
    #[arg(long)]
    pub focal: Option<f64>,
    #[arg(long)]
    pub baseline_mm: Option<f64>,
    /// 16-bit depth image in millimeters; 0 marks pixels without depth.
    #[arg(long, value_name = "PNG")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FrameInput {
    /// Color image.
    #[arg(long, value_name = "PNG")]
    pub frame: PathBuf,
    /// 16-bit depth image in millimeters; all depth is treated as missing without it.
    #[arg(long, value_name = "PNG")]
    pub depth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProposeArgs {
    #[command(flatten)]
    pub input: FrameInput,
    #[arg(long)]
    pub n_superpixels: Option<usize>,
    #[arg(long)]
    pub max_proposals: Option<usize>,
    /// External 8-bit contour map (255 is the strongest boundary).
    #[arg(long, value_name = "PNG")]
    pub contour: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub input: FrameInput,
    /// Directory of region masks (default: built-in proposals).
    #[arg(long, value_name = "DIR")]
    pub masks: Option<PathBuf>,
    #[arg(long)]
    pub n_neighbors: Option<usize>,
    #[arg(long)]
    pub knn: Option<usize>,
    /// JSON point matches `[x1, y1, x2, y2]` from earlier frames into this one,
    /// either one list (previous frame) or one list per frame back. Adds gaze columns.
    #[arg(long, value_name = "JSON")]
    pub correspondences: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset manifest.
    #[arg(long, value_name = "JSON")]
    pub dataset: Option<PathBuf>,
    /// saliency, future2, future4, future6 or interaction.
    #[arg(long, value_parser = parse_task)]
    pub task: Task,
    /// Sequence excluded from training.
    #[arg(long, value_name = "SEQ")]
    pub hold_out: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "EGOF")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetFrame {
    #[arg(long, value_name = "JSON")]
    pub dataset: Option<PathBuf>,
    /// Sequence id; may be omitted when the dataset has one sequence.
    #[arg(long, value_name = "SEQ")]
    pub sequence: Option<String>,
    /// Frame index within the sequence.
    #[arg(long, value_name = "INDEX")]
    pub frame: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "EGOF")]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub at: DatasetFrame,
    /// 8-bit heatmap; 255 is a score of 1.
    #[arg(long, value_name = "PNG")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FutureArgs {
    #[command(flatten)]
    pub predict: PredictArgs,
    /// Fail unless the model was trained for this horizon in seconds.
    #[arg(long)]
    pub horizon: Option<u32>,
}

#[derive(Debug, Args)]
pub struct InteractArgs {
    #[arg(long, value_name = "EGOF")]
    pub saliency_model: PathBuf,
    #[arg(long, value_name = "EGOF")]
    pub interaction_model: PathBuf,
    #[command(flatten)]
    pub at: DatasetFrame,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Heatmaps as `<method>/<sequence>/<name>.png`, or `<sequence>/<name>.png`
    /// for a single method.
    #[arg(long, value_name = "DIR")]
    pub pred: PathBuf,
    /// Ground-truth masks as `<sequence>/<name>.png`.
    #[arg(long, value_name = "DIR")]
    pub gt: PathBuf,
    /// CSV report.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    /// Markdown table (default: the CSV path with an `.md` extension).
    #[arg(long, value_name = "MD")]
    pub markdown: Option<PathBuf>,
    /// Task label printed in the report.
    #[arg(long, default_value = "saliency")]
    pub task: String,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long, value_name = "EGOF")]
    pub model: Option<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long)]
    pub sequences: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Fraction of activity phases labeled `sight`.
    #[arg(long)]
    pub sight_fraction: Option<f64>,
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse().map_err(|e: egoprior::Error| e.to_string())
}

/// Why a command failed.
#[derive(Debug)]
pub enum Failure {
    /// Bad invocation; reported with usage text, exit 2.
    Usage(String),
    /// Anything else; one line on stderr, exit 1.
    Domain(String),
}

impl From<egoprior::Error> for Failure {
    fn from(e: egoprior::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Depth(_) => "depth",
            Command::Propose(_) => "propose",
            Command::Features(_) => "features",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Future(_) => "future",
            Command::Interact(_) => "interact",
            Command::Eval(_) => "eval",
            Command::Importance(_) => "importance",
            Command::Synth(_) => "synth",
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.jobs.or(cfg.jobs) {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Domain(format!("thread pool: {}", e)))?;
    }
    match cli.command {
        Command::Depth(a) => commands::depth(&a, &cfg),
        Command::Propose(a) => commands::propose(&a, &cfg),
        Command::Features(a) => commands::features(&a, &cfg),
        Command::Train(a) => commands::train(&a, &cfg),
        Command::Predict(a) => commands::predict(&a, &cfg, None),
        Command::Future(a) => commands::predict(&a.predict, &cfg, Some(a.horizon)),
        Command::Interact(a) => commands::interact(&a, &cfg),
        Command::Eval(a) => commands::eval(&a),
        Command::Importance(a) => commands::importance(&a, &cfg),
        Command::Synth(a) => commands::synth(&a, &cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let sub = cmd.find_subcommand_mut(name).expect("known subcommand");
            sub.error(ErrorKind::InvalidValue, msg).exit()
        }
    }
}
