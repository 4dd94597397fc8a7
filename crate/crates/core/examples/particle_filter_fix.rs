//! Gradient-aided navigation against the free-inertial solution on the
//! same sensor errors.

use gravfix::harness::{monte_carlo, monte_carlo_with, Scenario, ScenarioConfig};

fn main() -> gravfix::Result<()> {
    let config = ScenarioConfig { runs: 3, truncate: Some(2400.0), ..Default::default() };
    let scenario = Scenario::new(&config)?;
    let aided = monte_carlo(&scenario)?;
    let unaided = monte_carlo_with(&scenario, &ScenarioConfig { unaided: true, ..config.clone() }, "unaided")?;

    println!("{:>6} {:>10} {:>10}", "t (s)", "aided", "unaided");
    for t in (0..=2400).step_by(300) {
        println!("{t:>6} {:>10.0} {:>10.0}", aided.stats.mean[t], unaided.stats.mean[t]);
    }
    for run in &aided.runs {
        let n_eff: f64 = run.diagnostics.iter().map(|d| d.n_eff).sum::<f64>() / run.diagnostics.len() as f64;
        let gradient_rms = (run.filter_gradient.iter().map(|g| g.error().powi(2)).sum::<f64>()
            / run.filter_gradient.len() as f64)
            .sqrt();
        println!(
            "run {}: mean error {:.0} m, final {:.0} m, mean N_eff {n_eff:.0}, gradient rms {gradient_rms:.2e}",
            run.run_index, run.mean_radial_error, run.final_radial_error
        );
    }
    Ok(())
}
