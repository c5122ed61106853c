use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use patternforge::GeneratorKind;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "patternforge", version, about = "Constrained random sampling patterns for event-driven ADCs")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

/// Sampling configuration. Precedence: flags, then `--config`, then `--case`,
/// then the first experiment's configuration.
#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct ConfigArgs {
    /// JSON file with `tau`, `t_grid`, `f_req`, `t_min`, `t_max`, `sigma2`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in case A, B, C or D.
    #[arg(long)]
    pub case: Option<String>,
    /// Pattern duration, e.g. `1ms`.
    #[arg(long)]
    pub tau: Option<String>,
    /// Grid period, e.g. `1us`.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Requested average sampling frequency, e.g. `100kHz`.
    #[arg(long)]
    pub f_req: Option<String>,
    /// Minimum time between points; `none` clears it.
    #[arg(long)]
    pub t_min: Option<String>,
    /// Maximum time between points; `none` clears it.
    #[arg(long)]
    pub t_max: Option<String>,
    #[arg(long)]
    pub sigma2: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a bag of patterns into a pattern text file.
    Generate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "gen", default_value = "angie")]
        generator: GeneratorKind,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Falls back to PATTERNFORGE_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a pattern file against a configuration; prints the report as JSON.
    Evaluate {
        input: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variance sweep with CSV/JSON reports and figure data.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Generators to run (comma-separated; default all).
        #[arg(long = "gen", value_delimiter = ',')]
        generators: Vec<GeneratorKind>,
        /// 10^4 patterns per cell and the 9-point grid instead of 10^5 and 13 points.
        #[arg(long)]
        desk_scale: bool,
        /// Explicit variance grid (comma-separated).
        #[arg(long, value_delimiter = ',')]
        sigma2_grid: Vec<f64>,
        /// Add a sigma2 = 0 cell.
        #[arg(long)]
        zero_point: bool,
        /// Pattern cap per cell.
        #[arg(long)]
        cap: Option<u64>,
        /// Count distinct patterns among the first N of each cell.
        #[arg(long)]
        eta_at: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the reference cases with their grid quantities.
    Cases {
        #[arg(long)]
        json: bool,
    },
    /// ROM image tools.
    #[command(subcommand)]
    Rom(RomCommand),
    /// Generation throughput against sampling frequency.
    Bench {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "gen", default_value = "angie")]
        generator: GeneratorKind,
        /// Frequencies to time (comma-separated).
        #[arg(long, value_delimiter = ',', default_value = "10kHz,20kHz,50kHz,100kHz")]
        freqs: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the command recorded in a manifest and compare output digests.
    Replay { manifest: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum RomCommand {
    /// Pattern text file to a `.crsp` image (an archive if it holds several patterns).
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// `.crsp` image or archive back to a pattern text file.
    Decode {
        input: PathBuf,
        /// Grid period of the stored patterns, e.g. `1us`.
        #[arg(long)]
        t_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trigger cycles of the driver for each stored pattern, as JSON.
    Simulate {
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        clock_div: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
