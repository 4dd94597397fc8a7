use nalgebra::Vector3;

use super::imu::ImuSample;
use crate::attitude::{euler_from_dcm, so3_exp};
use crate::error::{Error, Result};
use crate::geodesy::WGS84;
use crate::trajectory::StateVector;

/// Downward gravity magnitude used for compensation.
pub trait GravityModel {
    fn gravity(&self, lat_deg: f64, alt: f64) -> f64;
}

/// WGS84 normal gravity with the free-air correction.
#[derive(Clone, Copy, Debug, Default)]
pub struct NormalGravity;

impl GravityModel for NormalGravity {
    fn gravity(&self, lat_deg: f64, alt: f64) -> f64 {
        WGS84.normal_gravity(lat_deg, alt)
    }
}

/// Navigation state at a point in time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NavSolution {
    pub time: f64,
    pub state: StateVector,
}

impl NavSolution {
    pub fn new(time: f64, state: StateVector) -> Self {
        Self { time, state }
    }

    pub fn velocity_ned(&self) -> Vector3<f64> {
        self.state.velocity_ned()
    }

    /// Replaces the velocity with one given in NED axes.
    pub fn set_velocity_ned(&mut self, v: &Vector3<f64>) {
        let b = self.state.dcm().transpose() * v;
        self.state.u = b.x;
        self.state.v = b.y;
        self.state.w = b.z;
    }
}

/// One step of the local-level strapdown equations.
///
/// Attitude is propagated with the rotation-vector form of the body and
/// frame rates, velocity with the averaged specific force plus gravity and
/// Coriolis/transport terms, position with trapezoidal velocity.
pub fn mechanize<G: GravityModel>(prev: &NavSolution, imu: &ImuSample, gravity: &G, divergence_speed: f64) -> Result<NavSolution> {
    let dt = imu.time - prev.time;
    let s = &prev.state;
    let c0 = s.dcm();
    let v0 = c0 * s.body_velocity();
    let w_ie = WGS84.earth_rate_ned(s.latitude);
    let w_en = WGS84.transport_rate_ned(&v0, s.latitude, s.altitude);
    let w_in = w_ie + w_en;

    let c1 = so3_exp(&(-w_in * dt)) * c0 * so3_exp(&(imu.angular_rate * dt));
    let f_n = (c0 + c1) * 0.5 * imu.specific_force;
    let g = Vector3::new(0.0, 0.0, gravity.gravity(s.latitude, s.altitude));
    let v1 = v0 + (f_n + g - (w_ie * 2.0 + w_en).cross(&v0)) * dt;

    let speed = v1.norm();
    if !(speed <= divergence_speed) {
        return Err(Error::Divergence {
            time: imu.time,
            speed,
            limit: divergence_speed,
        });
    }

    let (rn0, re0) = WGS84.radii_of_curvature(s.latitude);
    let lat0 = s.latitude.to_radians();
    let h0 = s.altitude;
    let h1 = h0 - 0.5 * (v0.z + v1.z) * dt;
    let lat1 = lat0 + 0.5 * (v0.x + v1.x) * dt / (rn0 + h0);
    let (_, re1) = WGS84.radii_of_curvature(lat1.to_degrees());
    let dlon = 0.5 * dt * (v0.y / ((re0 + h0) * lat0.cos()) + v1.y / ((re1 + h1) * lat1.cos()));

    let (psi, theta, phi) = euler_from_dcm(&c1);
    let body_v = c1.transpose() * v1;
    let body_a = c1.transpose() * ((v1 - v0) / dt);
    let w_in1 = WGS84.earth_rate_ned(lat1.to_degrees()) + WGS84.transport_rate_ned(&v1, lat1.to_degrees(), h1);
    let w_nb = imu.angular_rate - c1.transpose() * w_in1;

    Ok(NavSolution {
        time: imu.time,
        state: StateVector {
            latitude: lat1.to_degrees(),
            longitude: crate::geodesy::wrap_longitude(s.longitude + dlon.to_degrees()),
            altitude: h1,
            u: body_v.x,
            v: body_v.y,
            w: body_v.z,
            a_x: body_a.x,
            a_y: body_a.y,
            a_z: body_a.z,
            psi: psi.to_degrees(),
            theta: theta.to_degrees(),
            phi: phi.to_degrees(),
            p: w_nb.x.to_degrees(),
            q: w_nb.y.to_degrees(),
            r: w_nb.z.to_degrees(),
        },
    })
}

/// Mechanization with a fixed gravity model and divergence limit.
#[derive(Clone, Copy, Debug)]
pub struct Mechanizer<G: GravityModel = NormalGravity> {
    pub gravity: G,
    pub divergence_speed: f64,
}

impl Mechanizer<NormalGravity> {
    /// Limit set to ten times the nominal speed.
    pub fn for_speed(nominal_speed: f64) -> Self {
        Self {
            gravity: NormalGravity,
            divergence_speed: 10.0 * nominal_speed,
        }
    }
}

impl<G: GravityModel> Mechanizer<G> {
    pub fn step(&self, prev: &NavSolution, imu: &ImuSample) -> Result<NavSolution> {
        mechanize(prev, imu, &self.gravity, self.divergence_speed)
    }
}
