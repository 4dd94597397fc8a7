//! Draws interferometer pairs and scores them against candidate ellipses.

use gravfix::gradiometer::{min_distance, sample_pair, CandidateEllipse, GradiometerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gradient = 3.07e-6 + 2.0e-8;
    for sigma_phi in [0.0, 5e-3, 15e-3] {
        let sensor = GradiometerConfig { sigma_phi, ..Default::default() };
        println!(
            "sigma_phi {:>5.1} mrad: sigma_S {:.2e} (closed form {:.2e}), dphi {:.4} rad",
            sigma_phi * 1e3,
            sensor.sigma_s(),
            sensor.sigma_s_approx(),
            sensor.gradient_to_delta_phi(gradient)
        );
        let truth = CandidateEllipse::from_gradient(gradient, &sensor);
        for offset in [0.0, 2e-8, 1e-7] {
            let candidate = CandidateEllipse::from_gradient(gradient + offset, &sensor);
            let n = 2000;
            let rms = ((0..n)
                .map(|_| min_distance(&sample_pair(gradient, 9.81, &sensor, &mut rng), &candidate).powi(2))
                .sum::<f64>()
                / n as f64)
                .sqrt();
            println!("  candidate off by {offset:.0e}: rms distance {rms:.3e}");
        }
        let pair = sample_pair(gradient, 9.81, &sensor, &mut rng);
        println!("  one pair ({:+.4}, {:+.4}), distance {:.2e}", pair.s0_norm, pair.s1_norm, min_distance(&pair, &truth));
    }
}
