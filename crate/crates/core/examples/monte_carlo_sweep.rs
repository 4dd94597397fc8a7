//! Phase-noise sweep on a short leg, with CSV output.

use gravfix::harness::{export, run_campaign, Scenario, ScenarioConfig};

fn main() -> gravfix::Result<()> {
    let config = ScenarioConfig {
        runs: 3,
        truncate: Some(900.0),
        sweeps: vec!["phase_noise=0,5e-3,15e-3".parse()?],
        ..Default::default()
    };
    let scenario = Scenario::new(&config)?;
    let campaign = run_campaign(&scenario)?;
    let (mean, std) = campaign.main.route_average();
    println!("baseline: {mean:.0} +- {std:.0} m");
    for p in &campaign.sweeps {
        println!("{} = {:<7}: {:.0} +- {:.0} m", p.parameter.name(), p.value, p.mean_error, p.std_error);
    }
    let dir = std::env::temp_dir().join("gravfix_sweep");
    export(&campaign, &dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
