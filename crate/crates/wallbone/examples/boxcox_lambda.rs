//! Box-Cox transformation: profile-likelihood lambda selection on skewed
//! data, and the exact round trip.
//!
//! ```bash
//! cargo run --release --example boxcox_lambda
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wallbone::transforms::{boxcox_profile_loglik, fit_lambda, BoxCoxTransform};

fn main() {
    // Log-normal data: the profile likelihood should land near lambda = 0.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let skewed: Vec<f64> = (0..500)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (0.8 * z).exp() * 12.0
        })
        .collect();
    let t = fit_lambda(&skewed).unwrap();
    println!("log-normal sample: fitted lambda = {:.4} (shift {:.2e})", t.lambda, t.shift);

    for lambda in [-1.0, -0.3, t.lambda, 0.5, 1.0] {
        let ll = boxcox_profile_loglik(&skewed, t.shift, lambda);
        println!("  profile log-likelihood at lambda {lambda:6.2}: {ll:10.2}");
    }

    // The fixed exponent used for wall databases.
    let wall_default = BoxCoxTransform { lambda: -0.3, shift: 0.0 };
    let y = 10.0;
    let z = wall_default.forward(y).unwrap();
    println!("lambda = -0.3: forward(10) = {z:.4}, inverse back = {:.4}", wall_default
        .inverse(z)
        .unwrap());

    // Round trip stays exact across magnitudes.
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let y = rng.gen_range(0.01f64..1e4);
        let z = wall_default.forward(y).unwrap();
        let back = wall_default.inverse(z).unwrap();
        worst = worst.max(((back - y) / y).abs());
    }
    println!("worst relative round-trip error over 1000 draws: {worst:.2e}");
}
