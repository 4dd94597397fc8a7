use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{RunSeeds, ScenarioConfig};
use super::maps::build_map_set;
use crate::ellipsefit::SlidingEllipseFit;
use crate::error::{Error, Result};
use crate::fusion::{candidate_position, fusion_step, init_particles, CorrectionVector};
use crate::geodesy::WGS84;
use crate::gradiometer::{failure_model, sample_pair};
use crate::gravmap::MapSet;
use crate::ins::{
    altimeter_aid, synthesize_imu_step, Altimeter, ImuCorruptor, ImuSample, Mechanizer, NavSolution, NormalGravity,
    MECHANIZATION_RATE,
};
use crate::trajectory::{build_route, Route, StateVector, TruthGenerator};

/// Truth, clean IMU data and maps shared by every run of a scenario.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub route: Route,
    pub maps: MapSet,
    /// Truth at every whole second, `duration + 1` entries.
    pub truth: Vec<EpochTruth>,
    /// Error-free IMU samples at the mechanization rate.
    pub clean_imu: Vec<ImuSample>,
    pub steps_per_epoch: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochTruth {
    pub time: f64,
    pub state: StateVector,
    /// Horizontal vibration magnitude over its per-axis σ.
    pub vibration_level: f64,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let r = &config.route;
        let route = build_route(&r.start, &r.end, r.speed, r.altitude)?;
        let maps = build_map_set(&config.maps, &route)?;
        Self::with_maps(config, route, maps)
    }

    /// Uses an already-built map set, e.g. to share maps across sweep values.
    pub fn with_maps(config: &ScenarioConfig, route: Route, maps: MapSet) -> Result<Self> {
        let duration = match config.truncate {
            Some(t) => (t.floor() as usize).min(route.duration_secs()),
            None => route.duration_secs(),
        };
        let steps = MECHANIZATION_RATE as usize;
        let mut gen = TruthGenerator::new(&route, MECHANIZATION_RATE, &config.vibration).take(duration * steps + 1);
        let sigma = config.vibration.sigma;
        let level = |v: &nalgebra::Vector3<f64>| if sigma > 0.0 { v.xy().norm() / sigma } else { 0.0 };
        let first = gen.next().ok_or_else(|| Error::DegenerateRoute("empty route".into()))?;
        let mut truth = vec![EpochTruth { time: 0.0, state: first.state, vibration_level: level(&first.vibration) }];
        let mut clean_imu = Vec::with_capacity(duration * steps);
        let mut prev = first;
        for (k, s) in gen.enumerate() {
            let (f, w) = synthesize_imu_step(&prev.state, &s.state, s.time - prev.time, &NormalGravity);
            clean_imu.push(ImuSample { time: s.time, specific_force: f, angular_rate: w });
            if (k + 1) % steps == 0 {
                truth.push(EpochTruth { time: truth.len() as f64, state: s.state, vibration_level: level(&s.vibration) });
            }
            prev = s;
        }
        Ok(Self { config: config.clone(), route, maps, truth, clean_imu, steps_per_epoch: steps })
    }

    /// Simulated seconds per run.
    pub fn duration_secs(&self) -> usize {
        self.truth.len() - 1
    }
}

/// A gradient estimate compared with the map value at the true position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientSample {
    pub time: f64,
    pub truth: f64,
    pub estimate: f64,
}

impl GradientSample {
    pub fn error(&self) -> f64 {
        self.estimate - self.truth
    }
}

/// Per-epoch filter diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub time: f64,
    pub n_eff: f64,
    pub mean: CorrectionVector,
    pub applied: CorrectionVector,
    pub valid: bool,
    pub estimated_gradient: f64,
    pub true_gradient: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub run_index: usize,
    pub seeds: RunSeeds,
    /// Horizontal position error at each second (m).
    pub radial_error: Vec<f64>,
    pub north_error: Vec<f64>,
    pub east_error: Vec<f64>,
    pub mean_radial_error: f64,
    pub final_radial_error: f64,
    /// Gradient at the filter's mean position.
    pub filter_gradient: Vec<GradientSample>,
    /// Windowed ellipse-fit estimates, stamped at the window's last sample.
    pub ellipse_gradient: Vec<GradientSample>,
    pub failures: usize,
    pub underflows: usize,
    pub diagnostics: Vec<EpochRecord>,
}

impl RunMetrics {
    /// Mean radial error from `t0` seconds onwards.
    pub fn mean_error_after(&self, t0: f64) -> f64 {
        let start = (t0.max(0.0).ceil() as usize).min(self.radial_error.len() - 1);
        let tail = &self.radial_error[start..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// One Monte Carlo run, deterministic in the scenario's base seed and `run_index`.
pub fn run_scenario(scenario: &Scenario, run_index: usize) -> Result<RunMetrics> {
    run_with_config(scenario, &scenario.config, run_index)
}

/// Runs over the scenario's truth and maps with different sensor, filter or
/// seed settings. Route, vibration and map settings in `config` are ignored.
pub fn run_with_config(scenario: &Scenario, config: &ScenarioConfig, run_index: usize) -> Result<RunMetrics> {
    simulate(scenario, config, run_index).map_err(|e| Error::Run { run_index, source: Box::new(e) })
}

fn simulate(scenario: &Scenario, cfg: &ScenarioConfig, run_index: usize) -> Result<RunMetrics> {
    let seeds = RunSeeds::derive(cfg.base_seed, run_index);
    let mech = Mechanizer::for_speed(cfg.route.speed);
    let mut corruptor = ImuCorruptor::new(&cfg.imu, MECHANIZATION_RATE, seeds.imu);
    let mut altimeter = Altimeter::new(&cfg.altimeter, seeds.altimeter);
    let alt_every = (MECHANIZATION_RATE / cfg.altimeter.rate_hz.max(1e-9)).round().max(1.0) as usize;
    let mut grad_rng = ChaCha8Rng::seed_from_u64(seeds.gradiometer);
    let mut fail_rng = ChaCha8Rng::seed_from_u64(seeds.failure);
    let mut pf_rng = ChaCha8Rng::seed_from_u64(seeds.filter);
    let aided = !cfg.unaided;
    let mut ensemble = init_particles(&cfg.filter, &mut pf_rng);
    let mut fit = SlidingEllipseFit::new(cfg.ellipse_window);

    let n = scenario.truth.len();
    let mut nav = NavSolution::new(0.0, scenario.truth[0].state);
    let mut radial = Vec::with_capacity(n);
    let mut north = Vec::with_capacity(n);
    let mut east = Vec::with_capacity(n);
    radial.push(0.0);
    north.push(0.0);
    east.push(0.0);
    let mut filter_gradient = Vec::new();
    let mut ellipse_gradient = Vec::new();
    let mut diagnostics = Vec::new();
    let (mut failures, mut underflows) = (0, 0);
    let steps = scenario.steps_per_epoch;

    for k in 1..n {
        for (i, clean) in scenario.clean_imu[(k - 1) * steps..k * steps].iter().enumerate() {
            nav = mech.step(&nav, &corruptor.corrupt(clean))?;
            let tick = (k - 1) * steps + i + 1;
            if cfg.altimeter.enabled && tick.is_multiple_of(alt_every) {
                let true_alt = scenario.truth[tick / steps].state.altitude;
                nav = altimeter_aid(&nav, altimeter.measure(true_alt), &cfg.altimeter);
            }
        }
        let truth = &scenario.truth[k];
        if aided {
            let pos = truth.state.position();
            let true_gradient = scenario.maps.query(pos.latitude, pos.longitude)?;
            let g_upper = WGS84.normal_gravity(pos.latitude, pos.altitude);
            let mut pair = sample_pair(true_gradient, g_upper, &cfg.gradiometer, &mut grad_rng);
            pair.valid = failure_model(&cfg.gradiometer, truth.vibration_level, &mut fail_rng);
            pair.timestamp = truth.time;
            if !pair.valid {
                failures += 1;
            }
            let before = nav;
            let (next, report) = fusion_step(
                &before,
                &mut ensemble,
                &pair,
                &scenario.maps,
                &cfg.gradiometer,
                &cfg.filter,
                &mut pf_rng,
            )?;
            nav = next;
            if report.underflow {
                underflows += 1;
            }
            let at_mean = candidate_position(&before, &report.mean);
            let estimated = scenario.maps.query(at_mean.latitude, at_mean.longitude)?;
            filter_gradient.push(GradientSample { time: truth.time, truth: true_gradient, estimate: estimated });
            if let Some(w) = fit.push(pair, &cfg.gradiometer) {
                if let Some(g) = w.gradient {
                    ellipse_gradient.push(GradientSample { time: w.t_end, truth: true_gradient, estimate: g });
                }
            }
            diagnostics.push(EpochRecord {
                time: truth.time,
                n_eff: report.n_eff,
                mean: report.mean,
                applied: report.applied,
                valid: pair.valid,
                estimated_gradient: estimated,
                true_gradient,
            });
        }
        let e = WGS84.geodetic_to_ned(&truth.state.position(), &nav.state.position());
        north.push(e.north);
        east.push(e.east);
        radial.push(e.horizontal_norm());
    }

    let mean_radial_error = radial.iter().sum::<f64>() / radial.len() as f64;
    let final_radial_error = *radial.last().unwrap_or(&0.0);
    Ok(RunMetrics {
        run_index,
        seeds,
        radial_error: radial,
        north_error: north,
        east_error: east,
        mean_radial_error,
        final_radial_error,
        filter_gradient,
        ellipse_gradient,
        failures,
        underflows,
        diagnostics,
    })
}
