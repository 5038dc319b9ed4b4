//! Generate a synthetic wall database and write it as a canonical CSV.
//!
//! ```bash
//! cargo run --release --example synthetic_database
//! ```

use wallbone::dataset::{
    feature_ranges, filter_scope, generate_synthetic_database, write_csv, FailureMode,
    ScopeCriteria,
};

fn main() {
    let records = generate_synthetic_database(200, 42, 0.15);
    println!("generated {} specimens (seed 42, 15% multiplicative noise)", records.len());

    let count = |m: FailureMode| records.iter().filter(|r| r.wall.failure_mode == m).count();
    println!(
        "failure modes: {} shear, {} shear-flexure, {} flexure",
        count(FailureMode::Shear),
        count(FailureMode::ShearFlexure),
        count(FailureMode::Flexure)
    );

    println!("\nfeature sampling ranges:");
    for r in feature_ranges() {
        println!("  {:<12} [{}, {}]", r.name, r.lo, r.hi);
    }

    let (in_scope, excluded) = filter_scope(records.clone(), &ScopeCriteria::default());
    println!(
        "\ndefault scope (S/SF, l_w/t_w <= 20, h_w/l_w <= 3): {} in, {} out",
        in_scope.len(),
        excluded.len()
    );
    for (r, why) in excluded.iter().take(3) {
        println!("  excluded {}: {}", r.wall.id, why);
    }

    let path = std::env::temp_dir().join("wallbone_synthetic.csv");
    write_csv(&records, &path).unwrap();
    println!("\nwrote {}", path.display());
    println!("train on it with:  wallbone train {} --seed 42", path.display());
}
