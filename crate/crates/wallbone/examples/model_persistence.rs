//! Save a fitted model as a TOML document and reload it: predictions come
//! back bit for bit.
//!
//! ```bash
//! cargo run --release --example model_persistence
//! ```

use wallbone::dataset::{generate_synthetic_database, CANONICAL_FEATURES};
use wallbone::evaluation::feature_matrix;
use wallbone::gpr::{FitConfig, GprModel, OptimizerConfig};

fn main() {
    let records = generate_synthetic_database(80, 3, 0.1);
    let features: Vec<String> = CANONICAL_FEATURES.iter().map(|s| s.to_string()).collect();
    let refs: Vec<_> = records.iter().collect();
    let x = feature_matrix(&refs, &features).unwrap();
    let y: Vec<f64> = records.iter().map(|r| r.backbone.unwrap().v_y).collect();

    let config = FitConfig {
        optimizer: OptimizerConfig { max_iters: 60, restarts: 2, ..Default::default() },
        ..Default::default()
    };
    let model = GprModel::fit(&x, &y, &features, "Vy_kn", &config).unwrap();

    let path = std::env::temp_dir().join("wallbone_model_Vy_kn.toml");
    model.save(&path).unwrap();
    let size = std::fs::metadata(&path).unwrap().len();
    println!("saved {} ({size} bytes)", path.display());

    let reloaded = GprModel::load(&path).unwrap();
    let mut max_bits_diff = 0u64;
    for i in 0..x.rows() {
        let a = model.predict(x.row(i)).unwrap().mean;
        let b = reloaded.predict(x.row(i)).unwrap().mean;
        max_bits_diff = max_bits_diff.max(a.to_bits() ^ b.to_bits());
    }
    println!(
        "round-trip check over {} training walls: bitwise identical = {}",
        x.rows(),
        max_bits_diff == 0
    );

    let head: String = model.to_document().lines().take(8).collect::<Vec<_>>().join("\n");
    println!("\ndocument head:\n{head}");
}
