//! Free-inertial drift over the first two hours of the route.

use gravfix::harness::analysis::{dominant_period, schuler_period};
use gravfix::harness::{monte_carlo, Scenario, ScenarioConfig};

fn main() -> gravfix::Result<()> {
    let config = ScenarioConfig { runs: 4, unaided: true, truncate: Some(7200.0), ..Default::default() };
    let scenario = Scenario::new(&config)?;
    let agg = monte_carlo(&scenario)?;

    for t in (0..=7200).step_by(900) {
        println!("t = {t:>5} s  radial error {:>7.0} +- {:>5.0} m", agg.stats.mean[t], agg.stats.std[t]);
    }

    let decimated: Vec<Vec<f64>> = agg
        .runs
        .iter()
        .flat_map(|r| [&r.north_error, &r.east_error])
        .map(|s| s.iter().step_by(10).copied().collect())
        .collect();
    let series: Vec<&[f64]> = decimated.iter().map(Vec::as_slice).collect();
    let found = dominant_period(&series, 10.0, 2400.0, 9000.0, 221, 2);
    println!(
        "dominant period {:.1} min (Schuler {:.1} min)",
        found / 60.0,
        schuler_period(9.81, 6.371e6) / 60.0
    );
    Ok(())
}
