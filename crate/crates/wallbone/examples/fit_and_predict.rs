//! Fit a peak-shear model on a synthetic database and predict a new wall.
//!
//! ```bash
//! cargo run --release --example fit_and_predict
//! ```

use wallbone::dataset::{generate_synthetic_database, wall_from_features, CANONICAL_FEATURES};
use wallbone::evaluation::feature_matrix;
use wallbone::gpr::{FitConfig, GprModel, OptimizerConfig};

fn main() {
    let records = generate_synthetic_database(150, 42, 0.10);
    let features: Vec<String> = CANONICAL_FEATURES.iter().map(|s| s.to_string()).collect();
    let refs: Vec<_> = records.iter().collect();
    let x = feature_matrix(&refs, &features).unwrap();
    let y: Vec<f64> = records.iter().map(|r| r.backbone.unwrap().v_max).collect();

    let config = FitConfig {
        optimizer: OptimizerConfig { max_iters: 80, restarts: 2, ..Default::default() },
        ..Default::default()
    };
    let model = GprModel::fit(&x, &y, &features, "Vmax_kn", &config).unwrap();
    println!(
        "fitted on {} walls: lambda = {:.3}, noise variance = {:.4}",
        model.training_size(),
        model.transform().lambda,
        model.params().noise_variance
    );

    // A new wall: moderate axial load, squat geometry.
    let new_wall = wall_from_features(
        "demo",
        &[
            35.0, 450.0, 420.0, 480.0, 440.0, // strengths [MPa]
            0.004, 0.005, 0.02, 0.008, // reinforcement ratios
            0.12, 1.1, 1.2, // alr, ar, ssr
        ],
        150.0,
    );
    let row: Vec<f64> = features.iter().map(|n| new_wall.feature(n).unwrap()).collect();
    let p = model.predict(&row).unwrap();
    println!("predicted V_max = {:.1} kN (posterior std {:.1} kN)", p.mean, p.std);

    // The posterior collapses onto observed walls and widens away from them.
    let near = model.predict(x.row(0)).unwrap();
    println!("at a training wall: {:.1} kN +/- {:.1} (target {:.1})", near.mean, near.std, y[0]);
}
