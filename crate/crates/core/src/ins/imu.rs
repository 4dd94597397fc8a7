use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mechanize::{GravityModel, NormalGravity};
use crate::attitude::so3_log;
use crate::attitude::so3_exp;
use crate::geodesy::{STANDARD_GRAVITY, WGS84};
use crate::trajectory::{StateVector, TruthSample};

/// One strapdown sample covering the interval that ends at `time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub time: f64,
    /// Body-axis specific force (m/s²).
    pub specific_force: Vector3<f64>,
    /// Body-axis inertial angular rate (rad/s).
    pub angular_rate: Vector3<f64>,
}

/// One-sigma inertial sensor errors.
///
/// Accelerometer bias and noise are expressed in units of standard gravity;
/// the noise densities are per √Hz.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SensorErrorBudget {
    pub accel_bias: f64,
    pub accel_nonorthogonality: f64,
    pub accel_scale: f64,
    pub accel_noise_density: f64,
    /// rad/s
    pub gyro_bias: f64,
    pub gyro_nonorthogonality: f64,
    pub gyro_scale: f64,
    /// rad/s/√Hz
    pub gyro_noise_density: f64,
}

impl SensorErrorBudget {
    /// Aviation-grade budget used by the default scenario.
    pub const AVIATION: Self = Self {
        accel_bias: 30e-6,
        accel_nonorthogonality: 10e-6,
        accel_scale: 10e-6,
        accel_noise_density: 15e-6,
        gyro_bias: 0.05e-6,
        gyro_nonorthogonality: 10e-6,
        gyro_scale: 10e-6,
        gyro_noise_density: 2.0e-6,
    };

    pub const ZERO: Self = Self {
        accel_bias: 0.0,
        accel_nonorthogonality: 0.0,
        accel_scale: 0.0,
        accel_noise_density: 0.0,
        gyro_bias: 0.0,
        gyro_nonorthogonality: 0.0,
        gyro_scale: 0.0,
        gyro_noise_density: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        [
            self.accel_bias,
            self.accel_nonorthogonality,
            self.accel_scale,
            self.accel_noise_density,
            self.gyro_bias,
            self.gyro_nonorthogonality,
            self.gyro_scale,
            self.gyro_noise_density,
        ]
        .iter()
        .all(|v| *v >= 0.0 && v.is_finite())
    }
}

impl Default for SensorErrorBudget {
    fn default() -> Self {
        Self::AVIATION
    }
}

/// Errors drawn once per run for one sensor triad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriadErrors {
    pub bias: Vector3<f64>,
    /// Identity plus scale errors on the diagonal and non-orthogonality off it.
    pub matrix: Matrix3<f64>,
    pub noise_sd: f64,
}

impl TriadErrors {
    fn draw(rng: &mut ChaCha8Rng, bias: f64, nonorth: f64, scale: f64, noise_sd: f64) -> Self {
        let mut n = || -> f64 { StandardNormal.sample(rng) };
        let bias = Vector3::new(n(), n(), n()) * bias;
        let mut matrix = Matrix3::identity();
        for i in 0..3 {
            for j in 0..3 {
                matrix[(i, j)] += if i == j { scale * n() } else { nonorth * n() };
            }
        }
        Self { bias, matrix, noise_sd }
    }

    fn apply(&self, x: &Vector3<f64>, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        let mut y = self.matrix * x + self.bias;
        if self.noise_sd > 0.0 {
            let mut n = || -> f64 { StandardNormal.sample(rng) };
            y += Vector3::new(n(), n(), n()) * self.noise_sd;
        }
        y
    }
}

/// Streaming corruption of clean IMU samples.
#[derive(Clone, Debug)]
pub struct ImuCorruptor {
    pub accel: TriadErrors,
    pub gyro: TriadErrors,
    rng: ChaCha8Rng,
}

impl ImuCorruptor {
    pub fn new(budget: &SensorErrorBudget, rate_hz: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let root_rate = rate_hz.sqrt();
        let accel = TriadErrors::draw(
            &mut rng,
            budget.accel_bias * STANDARD_GRAVITY,
            budget.accel_nonorthogonality,
            budget.accel_scale,
            budget.accel_noise_density * STANDARD_GRAVITY * root_rate,
        );
        let gyro = TriadErrors::draw(
            &mut rng,
            budget.gyro_bias,
            budget.gyro_nonorthogonality,
            budget.gyro_scale,
            budget.gyro_noise_density * root_rate,
        );
        Self { accel, gyro, rng }
    }

    pub fn corrupt(&mut self, s: &ImuSample) -> ImuSample {
        ImuSample {
            time: s.time,
            specific_force: self.accel.apply(&s.specific_force, &mut self.rng),
            angular_rate: self.gyro.apply(&s.angular_rate, &mut self.rng),
        }
    }
}

pub fn corrupt_imu(imu: &[ImuSample], budget: &SensorErrorBudget, rate_hz: f64, seed: u64) -> Vec<ImuSample> {
    let mut c = ImuCorruptor::new(budget, rate_hz, seed);
    imu.iter().map(|s| c.corrupt(s)).collect()
}

/// Specific force and inertial rate that carry `prev` exactly onto `next`
/// under [`mechanize`](super::mechanize).
pub fn synthesize_imu_step<G: GravityModel>(
    prev: &StateVector,
    next: &StateVector,
    dt: f64,
    gravity: &G,
) -> (Vector3<f64>, Vector3<f64>) {
    let c0 = prev.dcm();
    let c1 = next.dcm();
    let v0 = c0 * prev.body_velocity();
    let v1 = c1 * next.body_velocity();
    let w_ie = WGS84.earth_rate_ned(prev.latitude);
    let w_en = WGS84.transport_rate_ned(&v0, prev.latitude, prev.altitude);
    let w_in = w_ie + w_en;
    let rot = c0.transpose() * so3_exp(&(w_in * dt)) * c1;
    let w_ib = so3_log(&rot) / dt;
    let g = Vector3::new(0.0, 0.0, gravity.gravity(prev.latitude, prev.altitude));
    let rhs = (v1 - v0) / dt - g + (w_ie * 2.0 + w_en).cross(&v0);
    let c_mid = (c0 + c1) * 0.5;
    let f_b = c_mid.lu().solve(&rhs).unwrap_or_else(|| c0.transpose() * rhs);
    (f_b, w_ib)
}

/// Error-free IMU stream for a truth series sampled at a constant rate.
pub fn synthesize_imu(truth: &[TruthSample]) -> Vec<ImuSample> {
    synthesize_imu_with(truth, &NormalGravity)
}

pub fn synthesize_imu_with<G: GravityModel>(truth: &[TruthSample], gravity: &G) -> Vec<ImuSample> {
    truth
        .windows(2)
        .map(|w| {
            let dt = w[1].time - w[0].time;
            let (f, omega) = synthesize_imu_step(&w[0].state, &w[1].state, dt, gravity);
            ImuSample {
                time: w[1].time,
                specific_force: f,
                angular_rate: omega,
            }
        })
        .collect()
}
