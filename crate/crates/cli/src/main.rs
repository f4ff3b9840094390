//! `nestrank` command-line front end.
//!
//! Exit codes: 0 on success, 1 on input or parameter errors, 2 when an
//! iterative run stops at `--max-iter` without meeting the halting rule.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nestrank::analysis::Region;
use nestrank::metrics::{Algo, RunOptions, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "nestrank",
    version,
    about = "Fitness-complexity ranking of nested bipartite networks"
)]
struct Cli {
    #[command(subcommand)]
    #[serde(flatten)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Iterate a metric to the halting rule and write scores as JSON.
    Rank {
        /// Matrix file (pair list or dense CSV).
        input: PathBuf,
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Closed-form score ratios of a perfectly nested matrix.
    Analytic {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Metric::Fcm)]
        algo: Metric,
        /// Also iterate the metric and report the largest discrepancy.
        #[arg(long)]
        verify: bool,
        /// Halting threshold of the verification run.
        #[arg(long, default_value_t = 1e-13)]
        epsilon: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: usize,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Reorder rows and columns by score to expose the nested border.
    Pack {
        input: PathBuf,
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
        /// Write the packed matrix as a P2 graymap.
        #[arg(long)]
        pgm: Option<PathBuf>,
        /// Write the packed matrix as dense CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Flip a fraction of cells and correlate rescored ranks with the originals.
    Perturb {
        input: PathBuf,
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
        #[arg(long)]
        eta: f64,
        #[arg(long, value_enum, default_value_t = RegionArg::Full)]
        region: RegionArg,
        /// Seed of the first trial; trial k uses seed + k.
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Build a binary matrix from an export CSV through RCA.
    Ingest {
        input: PathBuf,
        #[arg(long)]
        year: i64,
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
        /// File with one country ID per line to keep.
        #[arg(long)]
        countries: Option<PathBuf>,
        /// File with one product ID per line to keep.
        #[arg(long)]
        products: Option<PathBuf>,
        #[arg(long, default_value = "country")]
        country_column: String,
        #[arg(long, default_value = "product")]
        product_column: String,
        #[arg(long, default_value = "year")]
        year_column: String,
        #[arg(long, default_value = "value")]
        value_column: String,
        /// Matrix file to write; labels go to `<output>.labels.json`.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a synthetic perfectly nested matrix.
    Generate {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
    /// Halting iteration against size for a synthetic model, as CSV.
    Scaling {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        /// Comma-separated ascending sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
        #[command(flatten)]
        #[serde(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Metric {
    Fcm,
    Mem,
    Gamma,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
enum RegionArg {
    Full,
    TopLeft,
    BottomRight,
}

impl From<RegionArg> for Region {
    fn from(r: RegionArg) -> Region {
        match r {
            RegionArg::Full => Region::Full,
            RegionArg::TopLeft => Region::TopLeft,
            RegionArg::BottomRight => Region::BottomRight,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    A,
    B,
}

#[derive(Debug, Args, Serialize)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Metric::Fcm)]
    algo: Metric,
    /// Exponent of the generalized metric, used with `--algo gamma`.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

impl RunArgs {
    fn algo(&self) -> anyhow::Result<Algo> {
        Ok(match self.algo {
            Metric::Fcm => Algo::Fcm,
            Metric::Mem => Algo::Mem,
            Metric::Gamma => format!("gamma:{}", self.gamma).parse()?,
        })
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            ..RunOptions::default()
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long)]
    alpha: f64,
    /// Columns per row for model A.
    #[arg(long, default_value_t = nestrank::bimatrix::DEFAULT_M_RATIO)]
    m_ratio: f64,
    /// Model B offset of the first row.
    #[arg(long, default_value_t = 1)]
    x: usize,
    /// Model B step below the breakpoint.
    #[arg(long, default_value_t = 2)]
    k1: usize,
    /// Model B step above the breakpoint.
    #[arg(long, default_value_t = 1)]
    k2: usize,
}

#[derive(Debug, Args, Serialize)]
struct OutArgs {
    /// Output file; stdout when absent. The effective configuration is
    /// written next to it as `<output>.config.json`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum Outcome {
    Done,
    NotConverged,
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
    match commands::dispatch(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("warning: stopped at --max-iter before the halting rule was met");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
