use std::path::PathBuf;
use std::process::ExitCode;

use batguard::dataio::{Sampling, StandardizeMethod};
use batguard::pipeline::{
    generate_synthetic, run_experiment, Command, PipelineConfig, RunOptions, SyntheticKind,
};
use batguard::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

const DATA_HINT: &str =
    "expected a CSV with a header row, numeric feature columns and a final 0/1 \
     class column, e.g. Time,V1..V28,Amount,Class; for offline testing run \
     `batguard gen-synthetic --out data.csv`";

#[derive(Parser)]
#[command(
    name = "batguard",
    version,
    about = "Autoencoder fraud scoring with bat-algorithm feature selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train the autoencoder on the training split and report on the test split.
    TrainAe(Common),
    /// Choose a feature subset with the binary bat algorithm, then retrain.
    SelectFeatures(Common),
    /// Score data with a saved model bundle.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Model bundle; defaults to <out>/model.json.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Score every row instead of the test split.
        #[arg(long)]
        all_rows: bool,
    },
    /// Autoencoder against logistic regression and decision trees.
    Compare(Common),
    /// Stratified k-fold cross-validation of every model.
    Kfold {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Write a synthetic labelled CSV.
    GenSynthetic {
        #[arg(long, value_enum, default_value = "gaussian")]
        kind: Kind,
        #[arg(long, default_value_t = 5000)]
        inliers: usize,
        #[arg(long, default_value_t = 50)]
        outliers: usize,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    sampling: Option<SamplingArg>,
    #[arg(long, value_enum)]
    standardize: Option<StandardizeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    None,
    Under,
    Smote,
}

#[derive(Clone, Copy, ValueEnum)]
enum StandardizeArg {
    Zscore,
    Minmax,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gaussian,
    SignalNoise,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(d) = &self.data {
            cfg.data = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(s) = self.sampling {
            cfg.sampling.mode = match s {
                SamplingArg::None => Sampling::None,
                SamplingArg::Under => Sampling::Under,
                SamplingArg::Smote => Sampling::Smote,
            };
        }
        if let Some(s) = self.standardize {
            cfg.standardize = match s {
                StandardizeArg::Zscore => StandardizeMethod::Zscore,
                StandardizeArg::Minmax => StandardizeMethod::Minmax,
            };
        }
        Ok(cfg)
    }
}

struct Failure {
    error: Error,
    hint: Option<&'static str>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, hint: None }
    }
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    let (common, command, opts) = match cli.command {
        Cmd::TrainAe(c) => (c, Command::TrainAe, RunOptions::default()),
        Cmd::SelectFeatures(c) => (c, Command::SelectFeatures, RunOptions::default()),
        Cmd::Evaluate {
            common,
            model,
            all_rows,
        } => (common, Command::Evaluate, RunOptions { model, all_rows }),
        Cmd::Compare(c) => (c, Command::Compare, RunOptions::default()),
        Cmd::Kfold { common, k } => {
            let mut cfg = common.config()?;
            if let Some(k) = k {
                cfg.kfold = k;
            }
            let manifest = run_experiment(&cfg, Command::Kfold, &RunOptions::default())?;
            println!(
                "kfold: wrote {} files to {}",
                manifest.outputs.len(),
                manifest.config.out.display()
            );
            return Ok(());
        }
        Cmd::GenSynthetic {
            kind,
            inliers,
            outliers,
            dim,
            seed,
            out,
        } => {
            let kind = match kind {
                Kind::Gaussian => SyntheticKind::Gaussian,
                Kind::SignalNoise => SyntheticKind::SignalNoise,
            };
            let d = generate_synthetic(kind, inliers, outliers, dim, seed, &out)?;
            println!(
                "wrote {} rows x {} features to {}",
                d.len(),
                d.n_features(),
                out.display()
            );
            return Ok(());
        }
    };
    let cfg = common.config()?;
    let manifest = run_experiment(&cfg, command, &opts).map_err(|e| match &e {
        Error::Io { path, .. } if *path == cfg.data => Failure {
            error: e,
            hint: Some(DATA_HINT),
        },
        _ => e.into(),
    })?;
    println!(
        "{}: wrote {} files to {}",
        manifest.command,
        manifest.outputs.len(),
        manifest.config.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            // one line on stderr: `error[<category>]: <message>`
            let mut msg = f.error.to_string().replace('\n', " ");
            if let Some(hint) = f.hint {
                msg = format!("{msg}; {hint}");
            }
            eprintln!("error[{}]: {msg}", f.error.category());
            ExitCode::from(2)
        }
    }
}
