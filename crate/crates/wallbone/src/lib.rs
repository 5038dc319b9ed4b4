//! Backbone-curve prediction for reinforced concrete shear walls.
//!
//! Walls tested under cyclic loading are summarized by a multilinear
//! backbone curve through seven points: shear at cracking (`V_cr`), shear
//! and displacement at yield (`V_y`, `d_y`), peak shear and its displacement
//! (`V_max`, `d_max`), and the ultimate point (`V_u`, `d_u`). This crate
//! predicts those seven values from twelve wall design properties with one
//! Gaussian process regression model per output (squared-exponential ARD
//! kernel, exact inference, marginal-likelihood training), and ships the
//! ASCE 41-17 tabulated backbone as the traditional baseline to compare
//! against.
//!
//! What lives where:
//!
//! * [`numerics`] — dense SPD linear algebra (Cholesky with adaptive jitter).
//! * [`transforms`] — Box-Cox output transformation and feature
//!   standardization.
//! * [`gpr`] — the kernel, exact posterior, marginal likelihood with
//!   analytic gradients, the quasi-Newton optimizer, and model persistence.
//! * [`dataset`] — specimen records, CSV ingestion, scope filtering,
//!   backbone extraction from hysteresis loops, and a synthetic database
//!   generator for desk-scale work.
//! * [`asce41`] — the ASCE 41-17 modeling-parameter tables and
//!   back-calculation.
//! * [`evaluation`] — the repeated random-split protocol, metrics,
//!   overtraining filter, aggregation, and the ASCE comparison.
//! * [`cli`] — the command implementations behind the `wallbone` binary.
//!
//! The `examples/` directory is the guided tour; each file is runnable:
//!
//! ```text
//! cargo run --release --example fit_and_predict
//! cargo run --release --example backbone_extraction
//! cargo run --release --example boxcox_lambda
//! cargo run --release --example asce41_baseline
//! cargo run --release --example synthetic_database
//! cargo run --release --example feature_relevance
//! cargo run --release --example model_persistence
//! cargo run --release --example evaluation_protocol
//! ```
//!
//! Quick start:
//!
//! ```
//! use wallbone::dataset::generate_synthetic_database;
//! use wallbone::evaluation::feature_matrix;
//! use wallbone::gpr::{FitConfig, GprModel, OptimizerConfig};
//!
//! let records = generate_synthetic_database(60, 7, 0.1);
//! let refs: Vec<_> = records.iter().collect();
//! let features: Vec<String> =
//!     wallbone::dataset::CANONICAL_FEATURES.iter().map(|s| s.to_string()).collect();
//! let x = feature_matrix(&refs, &features).unwrap();
//! let y: Vec<f64> = records.iter().map(|r| r.backbone.unwrap().v_max).collect();
//!
//! let config = FitConfig {
//!     optimizer: OptimizerConfig { max_iters: 40, restarts: 1, ..Default::default() },
//!     ..Default::default()
//! };
//! let model = GprModel::fit(&x, &y, &features, "Vmax_kn", &config).unwrap();
//! let prediction = model.predict(x.row(0)).unwrap();
//! assert!(prediction.mean > 0.0);
//! ```

pub mod asce41;
pub mod cli;
pub mod dataset;
pub mod evaluation;
pub mod gpr;
pub mod numerics;
pub mod transforms;

pub use dataset::{BackbonePoints, BackboneVar, WallRecord, WallSpecimen};
pub use gpr::{GprModel, KernelParams, Prediction};
pub use transforms::{BoxCoxTransform, Standardizer};
