//! Bootstrap particle filter over INS correction vectors.
//!
//! Every particle is a hypothesis about how far the navigation solution is
//! off. A signal pair is scored against the ellipse the gradient map predicts
//! at each particle's position; the weighted mean correction is fed back into
//! the navigation solution with a fixed gain and the ensemble is recentred.

use std::ops::{Add, Mul, Sub};

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::attitude::wrap_heading_deg;
use crate::error::{Error, Result};
use crate::geodesy::{GeodeticPosition, NedVector, WGS84};
use crate::gradiometer::{min_distance, CandidateEllipse, GradiometerConfig, PairSample};
use crate::gravmap::MapSet;
use crate::ins::NavSolution;

/// Offset between the navigation solution and a hypothesised truth.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CorrectionVector {
    /// metres
    pub d_north: f64,
    /// metres
    pub d_east: f64,
    /// body-axis m/s
    pub d_u: f64,
    pub d_v: f64,
    pub d_w: f64,
    /// degrees
    pub d_psi: f64,
    pub d_theta: f64,
    pub d_phi: f64,
}

/// Bound on the horizontal correction before a particle is treated as diverged.
pub const MAX_POSITION_CORRECTION: f64 = 50_000.0;

impl CorrectionVector {
    pub fn to_array(&self) -> [f64; 8] {
        [self.d_north, self.d_east, self.d_u, self.d_v, self.d_w, self.d_psi, self.d_theta, self.d_phi]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            d_north: a[0],
            d_east: a[1],
            d_u: a[2],
            d_v: a[3],
            d_w: a[4],
            d_psi: a[5],
            d_theta: a[6],
            d_phi: a[7],
        }
    }

    pub fn position(&self) -> NedVector {
        NedVector::new(self.d_north, self.d_east, 0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
            && self.d_north.abs() < MAX_POSITION_CORRECTION
            && self.d_east.abs() < MAX_POSITION_CORRECTION
    }
}

impl Add for CorrectionVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Sub for CorrectionVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] - b[i]))
    }
}

impl Mul<f64> for CorrectionVector {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub correction: CorrectionVector,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub n_particles: usize,
    pub resample_threshold_fraction: f64,
    pub alpha: f64,
    /// Likelihood width. `None` derives it from the gradiometer noise.
    pub sigma_s: Option<f64>,
    /// Process noise per √s on the position axes (m).
    pub sigma_pos: f64,
    /// Process noise per √s on the velocity axes (m/s).
    pub sigma_vel: f64,
    /// Process noise per √s on the attitude axes (deg).
    pub sigma_att: f64,
    pub delta_t: f64,
    /// Initial spread as a multiple of the process noise on each axis.
    pub initial_spread_factor: f64,
    /// Overrides the initial position spread (m) when set.
    pub initial_position_spread: Option<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            n_particles: 500,
            resample_threshold_fraction: 0.5,
            alpha: 0.05,
            sigma_s: None,
            sigma_pos: 25.0,
            sigma_vel: 0.05,
            sigma_att: 0.005,
            delta_t: 1.0,
            initial_spread_factor: 3.0,
            initial_position_spread: None,
        }
    }
}

/// Likelihood width used when neither the filter nor the sensor sets one.
pub const DEFAULT_SIGMA_S: f64 = 0.005;

impl FilterConfig {
    /// Likelihood width: the configured value, else the sensor noise model.
    pub fn resolved_sigma_s(&self, sensor: Option<&GradiometerConfig>) -> f64 {
        self.sigma_s.or(sensor.map(GradiometerConfig::sigma_s)).unwrap_or(DEFAULT_SIGMA_S)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::Config("filter.n_particles must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("filter.alpha must lie in (0, 1], got {}", self.alpha)));
        }
        let non_negative = [
            self.resample_threshold_fraction,
            self.sigma_pos,
            self.sigma_vel,
            self.sigma_att,
            self.initial_spread_factor,
        ];
        if non_negative.iter().any(|v| !(*v >= 0.0 && v.is_finite())) || !(self.delta_t > 0.0) {
            return Err(Error::Config("filter noise and timing parameters must be non-negative".into()));
        }
        if let Some(s) = self.sigma_s {
            if !(s > 0.0) {
                return Err(Error::Config(format!("filter.sigma_s must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

/// Weighted set of correction hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub particles: Vec<Particle>,
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn init_particles<R: Rng + ?Sized>(config: &FilterConfig, rng: &mut R) -> Ensemble {
    let k = config.initial_spread_factor;
    let pos = config.initial_position_spread.unwrap_or(k * config.sigma_pos);
    let (vel, att) = (k * config.sigma_vel, k * config.sigma_att);
    let w = 1.0 / config.n_particles as f64;
    let particles = (0..config.n_particles)
        .map(|_| {
            let mut draw = |s: f64| normal(rng) * s;
            Particle {
                correction: CorrectionVector {
                    d_north: draw(pos),
                    d_east: draw(pos),
                    d_u: draw(vel),
                    d_v: draw(vel),
                    d_w: draw(vel),
                    d_psi: draw(att),
                    d_theta: draw(att),
                    d_phi: draw(att),
                },
                weight: w,
            }
        })
        .collect();
    Ensemble { particles }
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    fn set_uniform(&mut self) {
        let w = 1.0 / self.particles.len() as f64;
        for p in &mut self.particles {
            p.weight = w;
        }
    }

    /// Multiplies weights by the given likelihoods and renormalizes. If
    /// every product vanishes the weights are reset to uniform and
    /// `WeightUnderflow` is returned.
    pub fn apply_likelihoods(&mut self, likelihoods: &[f64]) -> Result<()> {
        let mut total = 0.0;
        for (p, l) in self.particles.iter_mut().zip(likelihoods) {
            p.weight *= l;
            total += p.weight;
        }
        if !(total > 0.0 && total.is_finite()) {
            self.set_uniform();
            return Err(Error::WeightUnderflow);
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        Ok(())
    }
}

/// Horizontal position a particle stands for.
pub fn candidate_position(nav: &NavSolution, correction: &CorrectionVector) -> GeodeticPosition {
    WGS84.ned_to_geodetic(&nav.state.position(), &correction.position())
}

/// Distance of the pair from each particle's candidate ellipse.
pub fn particle_distances(
    ensemble: &Ensemble,
    pair: &PairSample,
    nav: &NavSolution,
    maps: &MapSet,
    sensor: &GradiometerConfig,
) -> Result<Vec<f64>> {
    ensemble
        .particles
        .par_iter()
        .map(|p| {
            let pos = candidate_position(nav, &p.correction);
            let g = maps.query(pos.latitude, pos.longitude)?;
            Ok(min_distance(pair, &CandidateEllipse::from_gradient(g, sensor)))
        })
        .collect()
}

/// Gaussian reweighting by distance to each candidate ellipse. Invalid pairs
/// leave the weights untouched.
pub fn reweight(
    ensemble: &mut Ensemble,
    pair: &PairSample,
    nav: &NavSolution,
    maps: &MapSet,
    sensor: &GradiometerConfig,
    config: &FilterConfig,
) -> Result<()> {
    if !pair.valid {
        return Ok(());
    }
    let sigma = config.resolved_sigma_s(Some(sensor));
    let d = particle_distances(ensemble, pair, nav, maps, sensor)?;
    let l: Vec<f64> = d.iter().map(|d| (-d * d / (2.0 * sigma * sigma)).exp()).collect();
    ensemble.apply_likelihoods(&l)
}

pub fn effective_particle_count(ensemble: &Ensemble) -> f64 {
    1.0 / ensemble.particles.iter().map(|p| p.weight * p.weight).sum::<f64>()
}

/// Systematic resampling; output weights are uniform.
pub fn resample<R: Rng + ?Sized>(ensemble: &Ensemble, rng: &mut R) -> Ensemble {
    let n = ensemble.len();
    let step = 1.0 / n as f64;
    let total = ensemble.weight_sum();
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cumulative = 0.0;
    let mut i = 0;
    for p in &ensemble.particles {
        cumulative += p.weight / total;
        while out.len() < n && u < cumulative {
            out.push(Particle {
                correction: p.correction,
                weight: step,
            });
            u += step;
        }
        i += 1;
    }
    // Rounding can leave the last slot unfilled.
    while out.len() < n {
        out.push(Particle {
            correction: ensemble.particles[i - 1].correction,
            weight: step,
        });
    }
    Ensemble { particles: out }
}

pub fn mean_correction(ensemble: &Ensemble) -> CorrectionVector {
    let mut acc = [0.0; 8];
    for p in &ensemble.particles {
        for (a, v) in acc.iter_mut().zip(p.correction.to_array()) {
            *a += p.weight * v;
        }
    }
    CorrectionVector::from_array(acc)
}

/// Moves the navigation solution by `alpha` times the mean correction and
/// shifts every particle back by the same amount.
pub fn apply_and_recenter(nav: &NavSolution, ensemble: &mut Ensemble, alpha: f64) -> (NavSolution, CorrectionVector) {
    let applied = mean_correction(ensemble) * alpha;
    let mut out = *nav;
    if applied == CorrectionVector::default() {
        return (out, applied);
    }
    let pos = WGS84.ned_to_geodetic(&nav.state.position(), &applied.position());
    out.state.set_position(&pos);
    out.state.u += applied.d_u;
    out.state.v += applied.d_v;
    out.state.w += applied.d_w;
    out.state.psi = wrap_heading_deg(out.state.psi + applied.d_psi);
    out.state.theta += applied.d_theta;
    out.state.phi += applied.d_phi;
    for p in &mut ensemble.particles {
        p.correction = p.correction - applied;
    }
    (out, applied)
}

/// Kinematic propagation of every correction over one measurement interval.
pub fn predict<R: Rng + ?Sized>(ensemble: &mut Ensemble, nav: &NavSolution, config: &FilterConfig, rng: &mut R) {
    let dt = config.delta_t;
    let c = nav.state.dcm();
    let v = nav.velocity_ned();
    let root = dt.sqrt();
    let g = WGS84.normal_gravity(nav.state.latitude, nav.state.altitude);
    let (sp, sv, sa) = (config.sigma_pos * root, config.sigma_vel * root, config.sigma_att * root);
    for p in &mut ensemble.particles {
        let k = &mut p.correction;
        let dv = c * Vector3::new(k.d_u, k.d_v, k.d_w);
        let dpsi = k.d_psi.to_radians();
        // A tilt error resolves gravity into the horizontal body axes.
        let tilt_u = -g * k.d_theta.to_radians() * dt;
        let tilt_v = g * k.d_phi.to_radians() * dt;
        // A heading error rotates the ground track about the vertical.
        k.d_north += (dv.x - dpsi * v.y) * dt;
        k.d_east += (dv.y + dpsi * v.x) * dt;
        k.d_u += tilt_u;
        k.d_v += tilt_v;
        let mut n = [0.0; 8];
        for x in n.iter_mut() {
            *x = normal(rng);
        }
        k.d_north += sp * n[0];
        k.d_east += sp * n[1];
        k.d_u += sv * n[2];
        k.d_v += sv * n[3];
        k.d_w += sv * n[4];
        k.d_psi += sa * n[5];
        k.d_theta += sa * n[6];
        k.d_phi += sa * n[7];
    }
}

/// What happened during one filter epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub n_eff: f64,
    pub resampled: bool,
    pub reweighted: bool,
    pub underflow: bool,
    /// Weighted mean correction before feedback, relative to the incoming navigation solution.
    pub mean: CorrectionVector,
    pub applied: CorrectionVector,
}

/// One measurement epoch: reweight, resample if degenerate, feed back, predict.
pub fn fusion_step<R: Rng + ?Sized>(
    nav: &NavSolution,
    ensemble: &mut Ensemble,
    pair: &PairSample,
    maps: &MapSet,
    sensor: &GradiometerConfig,
    config: &FilterConfig,
    rng: &mut R,
) -> Result<(NavSolution, StepReport)> {
    let mut underflow = false;
    let reweighted = pair.valid;
    match reweight(ensemble, pair, nav, maps, sensor, config) {
        Ok(()) => {}
        Err(Error::WeightUnderflow) => underflow = true,
        Err(e) => return Err(e),
    }
    let n_eff = effective_particle_count(ensemble);
    let resampled = reweighted && n_eff < config.resample_threshold_fraction * ensemble.len() as f64;
    if resampled {
        *ensemble = resample(ensemble, rng);
    }
    let mean = mean_correction(ensemble);
    let (nav, applied) = if reweighted {
        apply_and_recenter(nav, ensemble, config.alpha)
    } else {
        (*nav, CorrectionVector::default())
    };
    predict(ensemble, &nav, config, rng);
    Ok((
        nav,
        StepReport {
            n_eff,
            resampled,
            reweighted,
            underflow,
            mean,
            applied,
        },
    ))
}
