//! Extract backbone points from constructed cyclic loops.
//!
//! Builds a symmetric cyclic record whose first-loading branch rises at
//! 60 kN/mm to 600 kN at 10 mm and then degrades to 300 kN at 30 mm, runs
//! the envelope-averaging extraction, and prints the resulting polyline.
//!
//! ```bash
//! cargo run --release --example backbone_extraction
//! ```

use wallbone::dataset::{
    averaged_envelope, backbone_to_polyline, extract_backbone, ExtractConfig, HysteresisRecord,
};

fn virgin_curve(d: f64) -> f64 {
    if d <= 10.0 {
        60.0 * d
    } else {
        600.0 - 15.0 * (d - 10.0)
    }
}

fn build_cycles(amplitudes: &[f64], step: f64) -> Vec<(f64, f64)> {
    let mut samples = Vec::new();
    for &amp in amplitudes {
        let peak = virgin_curve(amp);
        for side in [1.0f64, -1.0] {
            let mut d = step;
            while d < amp {
                samples.push((side * d, side * virgin_curve(d)));
                d += step;
            }
            samples.push((side * amp, side * peak));
            let mut d = amp - step;
            while d > 0.0 {
                samples.push((side * d, side * peak * d / amp));
                d -= step;
            }
            samples.push((0.0, 0.0));
        }
    }
    samples
}

fn main() {
    let record = HysteresisRecord {
        samples: build_cycles(&[2.5, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0], 0.05),
        wall_height: 3000.0,
    };
    println!("record: {} samples, wall height {} mm", record.samples.len(), record.wall_height);

    let envelope = averaged_envelope(&record, 100).unwrap();
    println!("averaged envelope: {} points, peak {:.1} kN", envelope.len(), envelope
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max));

    let backbone = extract_backbone(&record, &ExtractConfig::default()).unwrap();
    println!(
        "V_cr {:.1} kN | V_y {:.1} kN at {:.2} mm | V_max {:.1} kN at {:.2} mm | \
         V_u {:.1} kN at {:.2} mm",
        backbone.v_cr,
        backbone.v_y,
        backbone.delta_y,
        backbone.v_max,
        backbone.delta_max,
        backbone.v_u,
        backbone.delta_u
    );
    // 0.8 * 600 = 480 kN on the descending branch sits at 18 mm.
    println!("polyline:");
    for (d, f) in backbone_to_polyline(&backbone) {
        println!("  {d:8.3} mm  {f:8.2} kN");
    }
}
