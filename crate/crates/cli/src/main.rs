mod commands;
mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "audiogoal", version, about = "Audio-goal navigation simulator toolkit")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Generate procedural multi-room maps (ASCII files).
    GenMaps,
    /// Sample episodes on a set of maps (JSON lines).
    GenEpisodes,
    /// Write per-band acoustic field records along episode paths (CSV).
    Curate,
    /// Measure per-band prediction errors and write a band-error prior.
    Calibrate,
    /// Run strategies on episodes and write result and aggregate CSVs.
    Evaluate,
    /// Draw a trajectory over a map and field records as PGM heatmaps.
    Render,
    /// Geodesic distance from a goal to every cell (CSV).
    DistanceField,
}

/// Every option, shared by all subcommands so one config file can drive a
/// whole experiment. Options a subcommand does not use are ignored.
#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Config file: a JSON object or key=value lines. Flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed of maps, episodes and calibration samples.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (0 = all cores). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Map directory (every .txt/.map/.json file) or a single map file.
    #[arg(long, global = true)]
    pub maps: Option<PathBuf>,
    /// Single map for render and distance-field.
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    /// Episode JSON lines.
    #[arg(long, global = true)]
    pub episodes: Option<PathBuf>,
    /// Band-error prior JSON.
    #[arg(long, global = true)]
    pub prior: Option<PathBuf>,
    /// Field dataset CSV to render.
    #[arg(long, global = true)]
    pub fields: Option<PathBuf>,
    /// Trajectory JSON lines to render.
    #[arg(long, global = true)]
    pub trajectory: Option<PathBuf>,

    /// Maps to generate, or episodes per map.
    #[arg(long, global = true, default_value_t = 10)]
    pub count: usize,
    /// Map width in cells.
    #[arg(long, global = true, default_value_t = 40)]
    pub width: usize,
    /// Map height in cells.
    #[arg(long, global = true, default_value_t = 30)]
    pub height: usize,
    /// Target room count per map.
    #[arg(long, global = true, default_value_t = 4)]
    pub rooms: usize,
    /// Door width in cells.
    #[arg(long, global = true, default_value_t = 3)]
    pub door_width: usize,
    /// Map cell size in meters.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub resolution: f64,

    /// Minimum start-goal geodesic distance in meters.
    #[arg(long, global = true, default_value_t = 1.5)]
    pub min_distance: f64,
    /// Maximum start-goal geodesic distance in meters.
    #[arg(long, global = true, default_value_t = 30.0)]
    pub max_distance: f64,
    /// Spectrum families: flat, tone, skewed.
    #[arg(long, global = true, default_value = "flat,tone,skewed")]
    pub spectra: String,

    /// Comma-separated strategy names.
    #[arg(long, global = true, default_value = "oracle")]
    pub strategies: String,
    /// navigation, prediction or both.
    #[arg(long, global = true, default_value = "navigation")]
    pub mode: String,
    /// Static receivers per episode in prediction mode.
    #[arg(long, global = true, default_value_t = 4)]
    pub samples_per_episode: usize,

    /// Per-band multiplicative noise scale (comma list).
    #[arg(long, global = true, default_value = "0,0,0,0,0")]
    pub sigma: String,
    /// Per-band noise floor (comma list, or one value for every band).
    #[arg(long, global = true, default_value = "0")]
    pub eps: String,
    /// Seed of the noise streams.
    #[arg(long, global = true, default_value_t = 0)]
    pub noise_seed: u64,
    /// Exponent on the inverse calibrated band error (default 5).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Exponent on the relative received band energy (default 0.8).
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Per-band absorption (comma list); its length sets the band count.
    #[arg(long, global = true, default_value = "0.92,0.94,0.96,0.97,0.98")]
    pub absorption: String,
    /// Field side length in cells (odd).
    #[arg(long, global = true, default_value_t = 9)]
    pub field_size: usize,
    /// Field cell size in meters.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub field_resolution: f64,
    /// Step budget per episode.
    #[arg(long, global = true, default_value_t = 500)]
    pub max_steps: usize,
    /// Stop distance to the goal that counts as success, in meters.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub success_radius: f64,

    /// Calibration samples when no episode file is given.
    #[arg(long, global = true, default_value_t = 500)]
    pub samples: usize,
    /// Downsample curated fields to this side length.
    #[arg(long, global = true)]
    pub downsample: Option<usize>,
    /// Receiver spacing along the shortest path, in cells.
    #[arg(long, global = true, default_value_t = 4)]
    pub stride: usize,
    /// Write one trajectory log per episode and strategy.
    #[arg(long, global = true)]
    pub log_trajectories: bool,

    /// Goal as `x,y` in meters.
    #[arg(long, global = true)]
    pub goal: Option<String>,
    /// PGM pixels per field cell.
    #[arg(long, global = true, default_value_t = 16)]
    pub scale: usize,
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(summary) => {
            if !summary.is_empty() {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
