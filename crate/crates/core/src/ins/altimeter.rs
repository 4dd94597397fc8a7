use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::mechanize::NavSolution;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AltimeterConfig {
    pub enabled: bool,
    /// Measurement noise (m, 1σ).
    pub sigma: f64,
    pub rate_hz: f64,
    /// Fraction of the altitude residual fed into the altitude per update.
    pub gain: f64,
    /// Residual fed into the down velocity per update (1/s).
    pub velocity_gain: f64,
}

impl Default for AltimeterConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            sigma: 5.0,
            rate_hz: 1.0,
            gain: 0.1,
            velocity_gain: 0.002,
        }
    }
}

/// Noisy altitude source.
#[derive(Clone, Debug)]
pub struct Altimeter {
    noise: Normal<f64>,
    rng: ChaCha8Rng,
}

impl Altimeter {
    pub fn new(config: &AltimeterConfig, seed: u64) -> Self {
        Self {
            noise: Normal::new(0.0, config.sigma.max(0.0)).expect("finite sigma"),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn measure(&mut self, true_altitude: f64) -> f64 {
        true_altitude + self.noise.sample(&mut self.rng)
    }
}

/// Pulls altitude and down velocity towards a measured altitude; horizontal
/// states are left alone.
pub fn altimeter_aid(solution: &NavSolution, measured_alt: f64, config: &AltimeterConfig) -> NavSolution {
    let residual = measured_alt - solution.state.altitude;
    if residual == 0.0 {
        return *solution;
    }
    let mut out = *solution;
    out.state.altitude += config.gain * residual;
    if config.velocity_gain != 0.0 {
        let mut v = solution.velocity_ned();
        v.z -= config.velocity_gain * residual;
        out.set_velocity_ned(&v);
    }
    out
}
