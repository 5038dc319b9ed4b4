//! Thin command-line front end; all logic lives in `wallbone::cli`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wallbone::cli::{
    cmd_asce41, cmd_evaluate, cmd_extract, cmd_predict, cmd_train, resolve_config, Asce41Input,
    CliError, OutputFormat, Overrides, ScopeChoice,
};
use wallbone::gpr::LambdaChoice;

#[derive(Parser)]
#[command(
    name = "wallbone",
    version,
    about = "Gaussian process backbone-curve models for reinforced concrete shear walls"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for models, reports, and polylines.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Stdout format: "table" or "doc".
    #[arg(long, global = true)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the seven backbone models on a specimen database.
    Train {
        /// Specimen database CSV with backbone target columns.
        db: PathBuf,
        /// Box-Cox exponent: "auto", "off", or a number.
        #[arg(long)]
        lambda: Option<LambdaChoice>,
        /// Failure-mode scope: "s-sf" or "all".
        #[arg(long)]
        scope: Option<ScopeChoice>,
        /// Comma-separated feature identifiers.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
    },
    /// Predict backbone points for new specimens from saved models.
    Predict {
        /// Directory containing the seven model_*.toml files.
        models_dir: PathBuf,
        /// Specimen CSV (targets optional and ignored).
        specimens: PathBuf,
    },
    /// Run the repeated-random-split evaluation protocol.
    Evaluate {
        /// Specimen database CSV with backbone target columns.
        db: PathBuf,
        /// Number of randomized trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Training fraction per trial.
        #[arg(long)]
        train_fraction: Option<f64>,
        /// Box-Cox exponent: "auto", "off", or a number.
        #[arg(long)]
        lambda: Option<LambdaChoice>,
        /// Failure-mode scope: "s-sf" or "all".
        #[arg(long)]
        scope: Option<ScopeChoice>,
        /// Comma-separated feature identifiers.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        /// Also compare against ASCE 41-17 on held-out specimens.
        #[arg(long)]
        compare_asce41: bool,
        /// Constant nominal shear strength V_n [kN] for the comparison.
        #[arg(long)]
        vn: Option<f64>,
    },
    /// Extract backbone points from a cyclic hysteresis record.
    Extract {
        /// Two-column CSV: disp_mm, force_kn.
        record: PathBuf,
        /// Wall height in mm (for drift conversion).
        #[arg(long)]
        height: f64,
    },
    /// Back-calculate ASCE 41-17 baseline backbone points.
    Asce41 {
        /// Specimen CSV; V_y comes from the nominal-strength model.
        #[arg(long, conflicts_with_all = ["vy", "height", "axial_metric"])]
        specimens: Option<PathBuf>,
        /// Yield strength V_y [kN] for direct input.
        #[arg(long, requires = "height")]
        vy: Option<f64>,
        /// Wall height [mm] for direct input.
        #[arg(long)]
        height: Option<f64>,
        /// Axial metric for the table row selection (default 0).
        #[arg(long)]
        axial_metric: Option<f64>,
        /// Constant nominal shear strength V_n [kN].
        #[arg(long)]
        vn: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = Overrides {
        seed: cli.seed,
        format: cli.format,
        out_dir: cli.out_dir,
        ..Default::default()
    };
    match cli.command {
        Command::Train { db, lambda, scope, features } => {
            overrides.lambda = lambda;
            overrides.scope = scope;
            overrides.features = features;
            let cfg = resolve_config(cli.config.as_deref(), &overrides)?;
            cmd_train(&db, &cfg)
        }
        Command::Predict { models_dir, specimens } => {
            let cfg = resolve_config(cli.config.as_deref(), &overrides)?;
            cmd_predict(&models_dir, &specimens, &cfg)
        }
        Command::Evaluate {
            db,
            trials,
            train_fraction,
            lambda,
            scope,
            features,
            compare_asce41,
            vn,
        } => {
            overrides.trials = trials;
            overrides.train_fraction = train_fraction;
            overrides.lambda = lambda;
            overrides.scope = scope;
            overrides.features = features;
            overrides.compare_asce41 = compare_asce41;
            overrides.vn_kn = vn;
            let cfg = resolve_config(cli.config.as_deref(), &overrides)?;
            cmd_evaluate(&db, &cfg)
        }
        Command::Extract { record, height } => {
            let cfg = resolve_config(cli.config.as_deref(), &overrides)?;
            cmd_extract(&record, height, &cfg)
        }
        Command::Asce41 { specimens, vy, height, axial_metric, vn } => {
            overrides.vn_kn = vn;
            let cfg = resolve_config(cli.config.as_deref(), &overrides)?;
            let input = match (specimens, vy, height) {
                (Some(path), None, _) => Asce41Input::Specimens(path),
                (None, Some(v_y_kn), Some(height_mm)) => Asce41Input::Direct {
                    v_y_kn,
                    height_mm,
                    axial_metric: axial_metric.unwrap_or(0.0),
                },
                _ => {
                    return Err(CliError::Schema(
                        "provide either --specimens or both --vy and --height".into(),
                    ))
                }
            };
            cmd_asce41(&input, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
