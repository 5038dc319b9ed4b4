//! The ASCE 41-17 baseline: table lookups, interpolation, and
//! back-calculation into physical backbone points.
//!
//! ```bash
//! cargo run --release --example asce41_baseline
//! ```

use wallbone::asce41::{
    back_calculate_shear, flexure_controlled_params, rotation_to_displacement,
    shear_controlled_params, Aci318Simplified, VnModel, WallState,
};
use wallbone::dataset::{backbone_to_polyline, wall_from_features};

fn main() {
    // Shear-controlled rows: low and high axial load.
    for axial in [0.3, 0.7] {
        let p = shear_controlled_params(&WallState::new(axial, 0.0, false));
        println!(
            "shear-controlled, axial {axial}: f={} c={} d={}% e={}% g={}%",
            p.f, p.c, p.d, p.e, p.g
        );
    }

    // Back-calculation: V_y = 100 kN on a 1000 mm wall, low axial row.
    let params = shear_controlled_params(&WallState::new(0.3, 0.0, false));
    let b = back_calculate_shear(&params, 100.0, 1000.0);
    println!("\nback-calculated backbone (V_y = 100 kN, h = 1000 mm):");
    for (d, f) in backbone_to_polyline(&b) {
        println!("  {d:7.2} mm  {f:7.2} kN");
    }

    // Flexure-controlled walls interpolate between the tabulated bounds.
    println!("\nflexure-controlled (confined boundary), axial sweep at low shear stress:");
    for axial in [0.05, 0.10, 0.175, 0.25, 0.30] {
        let p = flexure_controlled_params(&WallState::new(axial, 3.0, true));
        let h = 3000.0;
        println!(
            "  axial {axial:5.3}: a = {:.4} rad -> {:.1} mm plastic, b = {:.4} rad, c = {:.2}",
            p.a,
            rotation_to_displacement(p.a, h),
            p.b,
            p.c
        );
    }

    // Nominal strength plug-in feeding the baseline for a real-ish wall.
    let wall = wall_from_features(
        "demo",
        &[30.0, 420.0, 420.0, 450.0, 400.0, 0.0025, 0.003, 0.02, 0.008, 0.1, 1.0, 1.1],
        150.0,
    );
    let vn = Aci318Simplified::default();
    let v_n = vn.nominal_shear_strength_kn(&wall);
    let state = WallState::from_specimen(&wall, v_n);
    let bb = back_calculate_shear(&shear_controlled_params(&state), v_n, wall.wall_height);
    println!(
        "\nACI-based V_n = {v_n:.1} kN -> baseline V_max = {:.1} kN, d_u = {:.1} mm",
        bb.v_max, bb.delta_u
    );
}
