//! Truth motion for constant-speed, constant-altitude flights.
//!
//! The aircraft flies the great-ellipse path between the endpoints. Waypoints
//! are placed every second of flight (exact arc-length spacing); between
//! waypoints the path parameter is a cubic Hermite function of time, and the
//! velocity is renormalized to the commanded speed.

use std::io::Write;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::attitude::{angle_diff_deg, dcm_from_euler, euler_rates_to_body, wrap_heading_deg};
use crate::error::{Error, Result};
use crate::geodesy::{GeodeticPosition, GreatEllipse, WGS84};

/// Fifteen-element kinematic state.
///
/// Angles are in degrees and rates in degrees per second; velocity and
/// acceleration are resolved in body axes.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StateVector {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub a_x: f64,
    pub a_y: f64,
    pub a_z: f64,
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl StateVector {
    pub const FIELD_NAMES: [&'static str; 15] = [
        "latitude", "longitude", "altitude", "u", "v", "w", "a_x", "a_y", "a_z", "psi", "theta", "phi", "P", "Q", "R",
    ];

    pub fn to_array(&self) -> [f64; 15] {
        [
            self.latitude,
            self.longitude,
            self.altitude,
            self.u,
            self.v,
            self.w,
            self.a_x,
            self.a_y,
            self.a_z,
            self.psi,
            self.theta,
            self.phi,
            self.p,
            self.q,
            self.r,
        ]
    }

    pub fn position(&self) -> GeodeticPosition {
        GeodeticPosition {
            latitude: self.latitude,
            longitude: self.longitude,
            altitude: self.altitude,
        }
    }

    pub fn set_position(&mut self, p: &GeodeticPosition) {
        self.latitude = p.latitude;
        self.longitude = p.longitude;
        self.altitude = p.altitude;
    }

    /// Body-to-NED rotation.
    pub fn dcm(&self) -> nalgebra::Matrix3<f64> {
        dcm_from_euler(self.psi.to_radians(), self.theta.to_radians(), self.phi.to_radians())
    }

    pub fn body_velocity(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.w)
    }

    pub fn velocity_ned(&self) -> Vector3<f64> {
        self.dcm() * self.body_velocity()
    }

    pub fn speed(&self) -> f64 {
        self.body_velocity().norm()
    }
}

/// A straight, level flight with waypoints at one-second spacing.
#[derive(Clone, Debug)]
pub struct Route {
    pub start: GeodeticPosition,
    pub end: GeodeticPosition,
    pub speed: f64,
    pub altitude: f64,
    pub waypoints: Vec<GeodeticPosition>,
    path: GreatEllipse,
    params: Vec<f64>,
    param_rates: Vec<f64>,
}

impl Route {
    /// Flight time from the first to the last waypoint, in seconds.
    pub fn duration(&self) -> f64 {
        (self.waypoints.len() - 1) as f64
    }

    /// Whole seconds of flight.
    pub fn duration_secs(&self) -> usize {
        self.waypoints.len() - 1
    }

    /// Great-ellipse length between the endpoints at flight altitude.
    pub fn distance(&self) -> f64 {
        self.path.length()
    }

    /// Position and NED velocity at time `t` (clamped to the route).
    pub fn kinematics(&self, t: f64) -> (GeodeticPosition, Vector3<f64>) {
        let t = t.clamp(0.0, self.duration());
        let k = (t.floor() as usize).min(self.waypoints.len() - 2);
        let x = t - k as f64;
        let (s0, s1) = (self.params[k], self.params[k + 1]);
        let (m0, m1) = (self.param_rates[k], self.param_rates[k + 1]);
        let x2 = x * x;
        let x3 = x2 * x;
        let s = (2.0 * x3 - 3.0 * x2 + 1.0) * s0 + (x3 - 2.0 * x2 + x) * m0 + (-2.0 * x3 + 3.0 * x2) * s1 + (x3 - x2) * m1;
        let ds = (6.0 * x2 - 6.0 * x) * s0 + (3.0 * x2 - 4.0 * x + 1.0) * m0 + (-6.0 * x2 + 6.0 * x) * s1 + (3.0 * x2 - 2.0 * x) * m1;
        let p = self.path.point(s);
        let (rn, re) = WGS84.radii_of_curvature(p.position.latitude);
        let h = p.position.altitude;
        let v = Vector3::new(
            (rn + h) * p.dlat * ds,
            (re + h) * p.position.latitude.to_radians().cos() * p.dlon * ds,
            -p.dalt * ds,
        );
        let n = v.norm();
        let v = if n > 0.0 { v * (self.speed / n) } else { v };
        (p.position, v)
    }

    /// Heading in degrees [0, 360) at time `t`.
    pub fn heading(&self, t: f64) -> f64 {
        let (_, v) = self.kinematics(t);
        wrap_heading_deg(v.y.atan2(v.x).to_degrees())
    }
}

/// Builds the one-second waypoint list for a flight at `speed` and `altitude`.
pub fn build_route(start: &GeodeticPosition, end: &GeodeticPosition, speed: f64, altitude: f64) -> Result<Route> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::DegenerateRoute(format!("speed must be positive, got {speed}")));
    }
    let start = GeodeticPosition { altitude, ..*start };
    let end = GeodeticPosition { altitude, ..*end };
    let path = GreatEllipse::new(WGS84, &start, &end);
    let distance = path.length();
    if distance < 2.0 * speed {
        return Err(Error::DegenerateRoute(format!(
            "route length {distance:.1} m is shorter than two seconds of flight"
        )));
    }
    let count = (distance / speed).floor() as usize + 1;
    let params: Vec<f64> = (0..count).map(|k| path.parameter_at_length(k as f64 * speed)).collect();
    let param_rates: Vec<f64> = params.iter().map(|&s| speed / path.speed(s)).collect();
    let mut waypoints: Vec<GeodeticPosition> = params.iter().map(|&s| path.point(s).position).collect();
    waypoints[0] = start;
    Ok(Route {
        start,
        end,
        speed,
        altitude,
        waypoints,
        path,
        params,
        param_rates,
    })
}

/// Band-limited body-axis vibration added on top of the smooth kinematics.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct VibrationConfig {
    /// Standard deviation per axis (m/s²).
    pub sigma: f64,
    /// Corner frequency of the single-pole low-pass (Hz).
    pub corner_hz: f64,
    pub seed: u64,
}

impl Default for VibrationConfig {
    fn default() -> Self {
        Self {
            sigma: 5e-3,
            corner_hz: 2.0,
            seed: 0x5e_ed0f_7a11,
        }
    }
}

/// One truth sample. `vibration` is the perturbation already included in
/// the state's body acceleration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub time: f64,
    pub state: StateVector,
    pub vibration: Vector3<f64>,
}

/// Streams truth samples at a fixed rate from t = 0 to the last waypoint.
pub struct TruthGenerator<'a> {
    route: &'a Route,
    rate: f64,
    index: usize,
    count: usize,
    vib_state: Vector3<f64>,
    vib_pole: f64,
    vib_gain: f64,
    rng: ChaCha8Rng,
}

impl<'a> TruthGenerator<'a> {
    pub fn new(route: &'a Route, rate_hz: f64, vibration: &VibrationConfig) -> Self {
        let rate = rate_hz.max(1.0);
        let count = (route.duration() * rate).round() as usize + 1;
        let pole = (-std::f64::consts::TAU * vibration.corner_hz / rate).exp();
        let gain = vibration.sigma * (1.0 - pole * pole).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(vibration.seed);
        let vib_state = draw3(&mut rng) * vibration.sigma;
        Self {
            route,
            rate,
            index: 0,
            count,
            vib_state,
            vib_pole: pole,
            vib_gain: gain,
            rng,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

fn draw3(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    Vector3::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    )
}

impl Iterator for TruthGenerator<'_> {
    type Item = TruthSample;

    fn next(&mut self) -> Option<TruthSample> {
        if self.index >= self.count {
            return None;
        }
        let t = self.index as f64 / self.rate;
        let dt = 1.0 / self.rate;
        let (pos, vel) = self.route.kinematics(t);
        let psi = wrap_heading_deg(vel.y.atan2(vel.x).to_degrees());
        let t_lo = (t - dt).max(0.0);
        let t_hi = (t + dt).min(self.route.duration());
        let psi_dot = angle_diff_deg(self.route.heading(t_hi), self.route.heading(t_lo)) / (t_hi - t_lo);
        let body_rates = euler_rates_to_body(&Vector3::new(psi_dot, 0.0, 0.0), 0.0, 0.0);
        let speed = vel.norm();
        let vibration = self.vib_state;
        let state = StateVector {
            latitude: pos.latitude,
            longitude: pos.longitude,
            altitude: pos.altitude,
            u: speed,
            v: 0.0,
            w: 0.0,
            a_x: vibration.x,
            a_y: speed * psi_dot.to_radians() + vibration.y,
            a_z: vibration.z,
            psi,
            theta: 0.0,
            phi: 0.0,
            p: body_rates.x,
            q: body_rates.y,
            r: body_rates.z,
        };
        self.vib_state = self.vib_state * self.vib_pole + draw3(&mut self.rng) * self.vib_gain;
        self.index += 1;
        Some(TruthSample {
            time: t,
            state,
            vibration,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.count - self.index;
        (n, Some(n))
    }
}

/// Full truth series at `rate_hz`.
pub fn truth_states(route: &Route, rate_hz: f64, vibration: &VibrationConfig) -> Vec<TruthSample> {
    TruthGenerator::new(route, rate_hz, vibration).collect()
}

/// Writes truth samples as CSV, one row per sample, time first.
pub fn write_truth_csv<W: Write>(out: W, samples: &[TruthSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time_s"];
    header.extend(StateVector::FIELD_NAMES);
    w.write_record(&header).map_err(csv_err)?;
    for s in samples {
        let mut row = vec![s.time.to_string()];
        row.extend(s.state.to_array().iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::route_distance;

    fn pos(lat: f64, lon: f64) -> GeodeticPosition {
        GeodeticPosition::new(lat, lon, 0.0).unwrap()
    }

    fn liverpool_toulouse() -> Route {
        build_route(&pos(53.407579, -2.967853), &pos(43.604652, 1.444209), 100.0, 3000.0).unwrap()
    }

    #[test]
    fn route_duration_and_spacing() {
        let r = liverpool_toulouse();
        let d = r.distance();
        assert_eq!(r.waypoints.len(), (d / 100.0).floor() as usize + 1);
        assert!((r.duration() - 11370.0).abs() / 11370.0 < 1e-3, "duration {}", r.duration());
        assert_eq!(r.waypoints[0], r.start);
        for w in r.waypoints.iter().step_by(97) {
            assert_eq!(w.altitude, 3000.0);
        }
    }

    #[test]
    fn waypoint_spacing_is_one_second() {
        let r = liverpool_toulouse();
        for k in (0..r.waypoints.len() - 1).step_by(251) {
            let a = &r.waypoints[k];
            let b = &r.waypoints[k + 1];
            let chord = (WGS84.to_ecef(b) - WGS84.to_ecef(a)).norm();
            assert!((chord - 100.0).abs() < 1e-3, "spacing {chord} at {k}");
        }
    }

    #[test]
    fn equatorial_leg() {
        let end = pos(0.0, 100_000.0 / 111_319.490_793);
        let r = build_route(&pos(0.0, 0.0), &end, 100.0, 0.0).unwrap();
        assert_eq!(r.waypoints.len(), 1001);
        let last = r.waypoints.last().unwrap();
        assert!((last.longitude - 100_000.0 / 111_319.490_793).abs() < 1e-6);
        assert!(last.latitude.abs() < 1e-12);
    }

    #[test]
    fn degenerate_routes() {
        let a = pos(10.0, 10.0);
        assert!(matches!(build_route(&a, &a, 100.0, 0.0), Err(Error::DegenerateRoute(_))));
        let b = pos(10.0, 10.001);
        assert!(build_route(&a, &b, 100.0, 0.0).is_err());
        assert!(build_route(&a, &pos(11.0, 10.0), 0.0, 0.0).is_err());
    }

    #[test]
    fn level_flight_kinematics() {
        let r = liverpool_toulouse();
        let truth = truth_states(&r, 10.0, &VibrationConfig { sigma: 0.0, ..Default::default() });
        assert_eq!(truth.len(), r.duration_secs() * 10 + 1);
        for s in truth.iter().step_by(37) {
            assert_eq!(s.state.theta, 0.0);
            assert_eq!(s.state.phi, 0.0);
            assert!((s.state.u - 100.0).abs() < 1e-9);
            assert_eq!((s.state.v, s.state.w), (0.0, 0.0));
            assert!((s.state.speed() - 100.0).abs() < 1e-9);
        }
        assert!((truth[0].state.psi - 160.0).abs() < 10.0, "heading {}", truth[0].state.psi);
    }

    #[test]
    fn northbound_heading_zero() {
        let r = build_route(&pos(40.0, 5.0), &pos(41.0, 5.0), 100.0, 1000.0).unwrap();
        for s in TruthGenerator::new(&r, 1.0, &VibrationConfig::default()).step_by(50) {
            assert!(angle_diff_deg(s.state.psi, 0.0).abs() < 1e-6);
        }
    }

    #[test]
    fn reintegrated_position_matches_waypoints() {
        let r = liverpool_toulouse();
        let rate = 100.0;
        let dt = 1.0 / rate;
        let mut lat = r.start.latitude;
        let mut lon = r.start.longitude;
        let mut prev: Option<Vector3<f64>> = None;
        let mut worst = 0.0f64;
        for s in TruthGenerator::new(&r, rate, &VibrationConfig::default()) {
            let v = s.state.velocity_ned();
            if let Some(pv) = prev {
                let (rn, _) = WGS84.radii_of_curvature(lat);
                let vm = (pv + v) * 0.5;
                let dlat = (vm.x * dt / (rn + r.altitude)).to_degrees();
                let lat_mid = lat + 0.5 * dlat;
                let (_, re_mid) = WGS84.radii_of_curvature(lat_mid);
                lon += (vm.y * dt / ((re_mid + r.altitude) * lat_mid.to_radians().cos())).to_degrees();
                lat += dlat;
            }
            prev = Some(v);
            let k = (s.time * rate).round() as usize;
            if k.is_multiple_of(rate as usize) {
                let wp = &r.waypoints[k / rate as usize];
                let here = GeodeticPosition { latitude: lat, longitude: lon, altitude: r.altitude };
                let err = WGS84.geodetic_to_ned(wp, &here).horizontal_norm();
                worst = worst.max(err);
            }
        }
        assert!(worst < 0.5, "worst {worst}");
    }

    #[test]
    fn path_length_matches_route_distance() {
        let r = liverpool_toulouse();
        let mut len = 0.0;
        for w in r.waypoints.windows(2) {
            len += (WGS84.to_ecef(&w[1]) - WGS84.to_ecef(&w[0])).norm();
        }
        let d = route_distance(&r.start, &r.end);
        assert!((len - d).abs() / d < 1e-3);
    }

    #[test]
    fn body_rates_match_heading_differences() {
        let r = liverpool_toulouse();
        let truth = truth_states(&r, 100.0, &VibrationConfig::default());
        for k in (1..truth.len() - 1).step_by(9973) {
            let fd = angle_diff_deg(truth[k + 1].state.psi, truth[k - 1].state.psi) / 0.02;
            assert!((truth[k].state.r - fd).abs() < 1e-9, "{} vs {fd}", truth[k].state.r);
        }
    }

    #[test]
    fn vibration_statistics() {
        let r = liverpool_toulouse();
        let cfg = VibrationConfig::default();
        let v: Vec<f64> = TruthGenerator::new(&r, 100.0, &cfg).take(200_000).map(|s| s.vibration.x).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((sd - 5e-3).abs() < 0.1 * 5e-3, "sd {sd}");
        let a: Vec<_> = TruthGenerator::new(&r, 100.0, &cfg).take(10).collect();
        let b: Vec<_> = TruthGenerator::new(&r, 100.0, &cfg).take(10).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_export_rows() {
        let r = build_route(&pos(40.0, 5.0), &pos(40.02, 5.0), 100.0, 1000.0).unwrap();
        let samples = truth_states(&r, 1.0, &VibrationConfig::default());
        let mut buf = Vec::new();
        write_truth_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time_s,latitude,longitude,altitude,u,v,w,a_x"));
        assert_eq!(text.lines().count(), samples.len() + 1);
    }
}
