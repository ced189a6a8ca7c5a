use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use repliscope::cli::{
    cmd_analyze, cmd_id, cmd_loocv, cmd_predict, cmd_preprocess, cmd_replication, CliError,
    PredictArgs,
};
use repliscope::predictor::PredictionMode;

#[derive(Parser)]
#[command(name = "repliscope", version, about = "GAN replication measurement and dataset-size prediction")]
struct Cli {
    /// Worker threads (0 = auto).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// PRNG seed for seeded operations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    OneShot,
    TwoShot,
    Full,
}

impl From<ModeArg> for PredictionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::OneShot => PredictionMode::OneShot,
            ModeArg::TwoShot => PredictionMode::TwoShot,
            ModeArg::Full => PredictionMode::Full,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ingest an image directory into a VDS vector dataset.
    Preprocess {
        in_dir: PathBuf,
        out_vds: PathBuf,
        /// Square output resolution in pixels.
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        /// Z-score normalize per channel over the whole dataset.
        #[arg(long)]
        zscore: bool,
    },
    /// Estimate the intrinsic dimensionality of a dataset.
    Id {
        vds: PathBuf,
        #[arg(long, default_value_t = 10)]
        k1: usize,
        #[arg(long, default_value_t = 20)]
        k2: usize,
        /// Use the native resolution instead of downscaling.
        #[arg(long)]
        full_res: bool,
        /// Resolution the dataset was preprocessed at.
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        /// Downscaled resolution for the estimate.
        #[arg(long, default_value_t = 32)]
        id_resolution: usize,
        /// Write per-point estimates to this CSV.
        #[arg(long)]
        per_point_csv: Option<PathBuf>,
    },
    /// Measure the replication percentage of generated samples.
    Replication {
        training_vds: PathBuf,
        generated_vds: PathBuf,
        /// Distance threshold (default 8000, raw 128x128x3 pixels only).
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated ascending thresholds for a sweep.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<f64>>,
    },
    /// Run the full per-combo pipeline over an experiment manifest.
    Analyze { manifest: PathBuf },
    /// One-shot prediction from shared parameters and one measurement.
    Predict {
        #[arg(long)]
        shared_a: f64,
        #[arg(long, default_value_t = 100.0)]
        shared_c: f64,
        /// The measurement as "mu1:percentage".
        #[arg(long)]
        point: String,
        /// Predict replication at this complexity.
        #[arg(long)]
        pct_for_id: Option<f64>,
        /// Predict replication at this dataset size.
        #[arg(long)]
        pct_for_size: Option<f64>,
        /// Predict the dataset size reaching this replication percentage.
        #[arg(long)]
        size_for_pct: Option<f64>,
        /// Growth-curve scale (for size queries).
        #[arg(long)]
        growth_s: Option<f64>,
        /// Growth-curve rate (for size queries).
        #[arg(long)]
        growth_beta: Option<f64>,
    },
    /// Leave-one-combination-out cross-validation over a manifest.
    Loocv {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::OneShot)]
        mode: ModeArg,
    },
    /// Print the toolkit version.
    Version,
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("{what} must look like \"x:y\", got {text:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("{what}: {s:?} is not a number")))
    };
    Ok((parse(a)?, parse(b)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preprocess { in_dir, out_vds, resolution, zscore } => {
            cmd_preprocess(&in_dir, &out_vds, resolution, zscore)
        }
        Command::Id { vds, k1, k2, full_res, resolution, id_resolution, per_point_csv } => {
            cmd_id(&vds, k1, k2, full_res, resolution, id_resolution, per_point_csv.as_deref())
        }
        Command::Replication { training_vds, generated_vds, alpha, sweep } => cmd_replication(
            &training_vds,
            &generated_vds,
            alpha,
            sweep.as_deref(),
            &cli.out_dir,
        ),
        Command::Analyze { manifest } => cmd_analyze(&manifest, &cli.out_dir),
        Command::Predict {
            shared_a,
            shared_c,
            point,
            pct_for_id,
            pct_for_size,
            size_for_pct,
            growth_s,
            growth_beta,
        } => {
            let point = parse_pair(&point, "--point")?;
            let growth = match (growth_s, growth_beta) {
                (Some(s), Some(beta)) => Some((s, beta)),
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--growth-s and --growth-beta must be given together".into(),
                    ))
                }
            };
            let args = PredictArgs {
                shared_a,
                shared_c,
                point,
                pct_for_size,
                size_for_pct,
                pct_for_id,
                growth,
            };
            cmd_predict(&args, &cli.out_dir)
        }
        Command::Loocv { manifest, mode } => cmd_loocv(&manifest, mode.into(), &cli.out_dir),
        Command::Version => {
            println!("repliscope {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // ignore failure if a pool already exists (e.g. repeated init in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
