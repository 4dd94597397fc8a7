use rayon::prelude::*;

use super::config::{ScenarioConfig, SweepParameter, SweepSpec};
use super::run::{run_with_config, RunMetrics, Scenario};
use crate::error::Result;

/// Per-epoch mean and sample standard deviation across runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Sample mean and standard deviation (zero for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates radial error across runs, independent of their order.
pub fn epoch_stats(runs: &[RunMetrics]) -> EpochStats {
    let mut sorted: Vec<&RunMetrics> = runs.iter().collect();
    sorted.sort_by_key(|r| r.run_index);
    let len = sorted.iter().map(|r| r.radial_error.len()).min().unwrap_or(0);
    let mut stats = EpochStats { mean: Vec::with_capacity(len), std: Vec::with_capacity(len) };
    let mut column = Vec::with_capacity(sorted.len());
    for k in 0..len {
        column.clear();
        column.extend(sorted.iter().map(|r| r.radial_error[k]));
        let (m, s) = mean_std(&column);
        stats.mean.push(m);
        stats.std.push(s);
    }
    stats
}

/// Runs of one configuration and their per-epoch statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub label: String,
    pub config: ScenarioConfig,
    pub runs: Vec<RunMetrics>,
    pub stats: EpochStats,
}

impl Aggregate {
    pub fn from_runs(label: impl Into<String>, config: ScenarioConfig, mut runs: Vec<RunMetrics>) -> Self {
        runs.sort_by_key(|r| r.run_index);
        let stats = epoch_stats(&runs);
        Self { label: label.into(), config, runs, stats }
    }

    /// Mean and std across runs of each run's route-averaged radial error.
    pub fn route_average(&self) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.mean_radial_error).collect::<Vec<_>>())
    }

    /// As [`Aggregate::route_average`] but only from `t0` seconds onwards.
    pub fn route_average_after(&self, t0: f64) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.mean_error_after(t0)).collect::<Vec<_>>())
    }

    pub fn final_error(&self) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.final_radial_error).collect::<Vec<_>>())
    }
}

/// Runs `config.runs` simulations in parallel over the scenario's truth.
pub fn monte_carlo_with(scenario: &Scenario, config: &ScenarioConfig, label: &str) -> Result<Aggregate> {
    let runs = (0..config.runs)
        .into_par_iter()
        .map(|i| run_with_config(scenario, config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Aggregate::from_runs(label, config.clone(), runs))
}

pub fn monte_carlo(scenario: &Scenario) -> Result<Aggregate> {
    let label = if scenario.config.unaided { "unaided" } else { "aided" };
    monte_carlo_with(scenario, &scenario.config, label)
}

/// One row of a parameter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub parameter: SweepParameter,
    pub value: f64,
    /// Route-averaged radial error across runs (m).
    pub mean_error: f64,
    pub std_error: f64,
    /// Same, averaged only after the settle time.
    pub mean_error_settled: f64,
    pub std_error_settled: f64,
    pub aggregate: Aggregate,
}

/// Aided runs for each swept value, sharing run seeds across values.
pub fn sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    spec.values
        .iter()
        .map(|&value| {
            let mut config = scenario.config.clone();
            config.unaided = false;
            spec.parameter.apply(&mut config, value);
            config.validate()?;
            let label = format!("{}={value}", spec.parameter.name());
            let aggregate = monte_carlo_with(scenario, &config, &label)?;
            let (mean_error, std_error) = aggregate.route_average();
            let (mean_error_settled, std_error_settled) = aggregate.route_average_after(config.settle_time);
            Ok(SweepPoint {
                parameter: spec.parameter,
                value,
                mean_error,
                std_error,
                mean_error_settled,
                std_error_settled,
                aggregate,
            })
        })
        .collect()
}

/// The main Monte Carlo set plus any configured sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub main: Aggregate,
    pub sweeps: Vec<SweepPoint>,
}

pub fn run_campaign(scenario: &Scenario) -> Result<Campaign> {
    let main = monte_carlo(scenario)?;
    let mut sweeps = Vec::new();
    for spec in &scenario.config.sweeps {
        sweeps.extend(sweep(scenario, spec)?);
    }
    Ok(Campaign { main, sweeps })
}
