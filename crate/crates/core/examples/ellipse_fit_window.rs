//! Recovers the gradient from windows of pairs by fitting a conic, along a
//! slowly rising gradient.

use gravfix::ellipsefit::SlidingEllipseFit;
use gravfix::gradiometer::{sample_pair, GradiometerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let sensor = GradiometerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fit = SlidingEllipseFit::new(20);
    let truth = |t: f64| 3.07e-6 + 2.0e-8 * (t / 300.0).sin();

    println!("{:>6} {:>14} {:>14} {:>11}", "t_end", "estimate", "truth", "error");
    let mut errors = Vec::new();
    for k in 0..600 {
        let t = k as f64;
        let mut pair = sample_pair(truth(t), 9.81, &sensor, &mut rng);
        pair.timestamp = t;
        if let Some(w) = fit.push(pair, &sensor) {
            if let Some(g) = w.gradient {
                let err = g - truth(w.t_end);
                errors.push(err);
                println!("{:>6.0} {:>14.6e} {:>14.6e} {:>+11.2e}", w.t_end, g, truth(w.t_end), err);
            }
        }
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let std = (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (errors.len() - 1) as f64).sqrt();
    println!("{} windows, error {mean:+.2e} +- {std:.2e} s^-2", errors.len());
}
