//! Strapdown inertial navigation: IMU synthesis from truth, sensor error
//! injection, local-level mechanization and altimeter aiding.

mod altimeter;
mod imu;
mod mechanize;

pub use altimeter::{altimeter_aid, Altimeter, AltimeterConfig};
pub use imu::{
    corrupt_imu, synthesize_imu, synthesize_imu_step, synthesize_imu_with, ImuCorruptor, ImuSample, SensorErrorBudget,
    TriadErrors,
};
pub use mechanize::{mechanize, GravityModel, Mechanizer, NavSolution, NormalGravity};

/// Default mechanization rate (Hz).
pub const MECHANIZATION_RATE: f64 = 100.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::{GeodeticPosition, WGS84};
    use crate::trajectory::{build_route, StateVector, TruthGenerator, TruthSample, VibrationConfig};
    use nalgebra::Vector3;

    fn stationary(lat: f64) -> StateVector {
        StateVector { latitude: lat, longitude: 3.0, altitude: 500.0, ..Default::default() }
    }

    #[test]
    fn stationary_platform_senses_gravity_and_earth_rate() {
        let s = stationary(45.0);
        let (f, w) = synthesize_imu_step(&s, &s, 0.01, &NormalGravity);
        let g = WGS84.normal_gravity(45.0, 500.0);
        assert!((f - Vector3::new(0.0, 0.0, -g)).norm() < 1e-12);
        assert!((w - WGS84.earth_rate_ned(45.0)).norm() < 1e-15);
    }

    #[test]
    fn stationary_mechanization_stays_put() {
        let s = stationary(50.0);
        let (f, w) = synthesize_imu_step(&s, &s, 0.01, &NormalGravity);
        let mut nav = NavSolution::new(0.0, s);
        for k in 1..=6000 {
            let imu = ImuSample { time: k as f64 * 0.01, specific_force: f, angular_rate: w };
            nav = mechanize(&nav, &imu, &NormalGravity, 1000.0).unwrap();
        }
        let d = WGS84.geodetic_to_ned(&s.position(), &nav.state.position());
        assert!(d.norm() < 1e-6, "{d:?}");
    }

    #[test]
    fn error_free_closed_loop_full_route() {
        let a = GeodeticPosition::new(53.407579, -2.967853, 0.0).unwrap();
        let b = GeodeticPosition::new(43.604652, 1.444209, 0.0).unwrap();
        let route = build_route(&a, &b, 100.0, 3000.0).unwrap();
        let mech = Mechanizer::for_speed(100.0);
        let mut gen = TruthGenerator::new(&route, MECHANIZATION_RATE, &VibrationConfig::default());
        let first = gen.next().unwrap();
        let mut prev: TruthSample = first;
        let mut nav = NavSolution::new(0.0, first.state);
        let mut worst = 0.0f64;
        for t in gen {
            let (f, w) = synthesize_imu_step(&prev.state, &t.state, t.time - prev.time, &NormalGravity);
            nav = mech.step(&nav, &ImuSample { time: t.time, specific_force: f, angular_rate: w }).unwrap();
            prev = t;
            let err = WGS84.geodetic_to_ned(&t.state.position(), &nav.state.position()).horizontal_norm();
            worst = worst.max(err);
        }
        assert!(worst < 5.0, "worst horizontal error {worst}");
    }

    fn clean_stream(n: usize) -> Vec<ImuSample> {
        (1..=n)
            .map(|k| ImuSample {
                time: k as f64 * 0.01,
                specific_force: Vector3::new(0.1 * (k as f64 * 0.01).sin(), 0.02, -9.81),
                angular_rate: Vector3::new(1e-5, -2e-5, 3e-5),
            })
            .collect()
    }

    #[test]
    fn zero_budget_is_identity() {
        let clean = clean_stream(1000);
        assert_eq!(corrupt_imu(&clean, &SensorErrorBudget::ZERO, 100.0, 7), clean);
    }

    #[test]
    fn bias_only_mean_offset() {
        let clean = clean_stream(5000);
        let budget = SensorErrorBudget { accel_bias: 30e-6, gyro_bias: 0.05e-6, ..SensorErrorBudget::ZERO };
        let c = ImuCorruptor::new(&budget, 100.0, 11);
        let out = corrupt_imu(&clean, &budget, 100.0, 11);
        let n = out.len() as f64;
        let mean_f: Vector3<f64> = out.iter().zip(&clean).map(|(a, b)| a.specific_force - b.specific_force).sum::<Vector3<f64>>() / n;
        let mean_w: Vector3<f64> = out.iter().zip(&clean).map(|(a, b)| a.angular_rate - b.angular_rate).sum::<Vector3<f64>>() / n;
        assert!((mean_f - c.accel.bias).norm() < 1e-12);
        assert!((mean_w - c.gyro.bias).norm() < 1e-18);
    }

    #[test]
    fn accel_noise_density_to_sd() {
        let clean = vec![ImuSample { time: 0.0, specific_force: Vector3::zeros(), angular_rate: Vector3::zeros() }; 100_000];
        let budget = SensorErrorBudget { accel_noise_density: 15e-6, ..SensorErrorBudget::ZERO };
        let out = corrupt_imu(&clean, &budget, 100.0, 3);
        let xs: Vec<f64> = out.iter().map(|s| s.specific_force.x).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let expected = 15e-6 * 9.80665 * 10.0;
        assert!((sd - expected).abs() < 0.05 * expected, "{sd} vs {expected}");
    }

    #[test]
    fn corruption_is_deterministic() {
        let clean = clean_stream(500);
        let a = corrupt_imu(&clean, &SensorErrorBudget::AVIATION, 100.0, 99);
        let b = corrupt_imu(&clean, &SensorErrorBudget::AVIATION, 100.0, 99);
        let c = corrupt_imu(&clean, &SensorErrorBudget::AVIATION, 100.0, 100);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn divergence_detected() {
        let s = stationary(10.0);
        let nav = NavSolution::new(0.0, s);
        let imu = ImuSample { time: 0.01, specific_force: Vector3::new(1e6, 0.0, 0.0), angular_rate: Vector3::zeros() };
        assert!(matches!(mechanize(&nav, &imu, &NormalGravity, 1000.0), Err(crate::Error::Divergence { .. })));
    }

    #[test]
    fn altimeter_no_change_when_matching() {
        let nav = NavSolution::new(0.0, StateVector { altitude: 3000.0, u: 100.0, ..Default::default() });
        assert_eq!(altimeter_aid(&nav, 3000.0, &AltimeterConfig::default()), nav);
    }

    fn settle(cfg: &AltimeterConfig, updates: usize) -> NavSolution {
        let mut nav = NavSolution::new(0.0, StateVector { altitude: 3000.0, ..Default::default() });
        for _ in 0..updates {
            nav = altimeter_aid(&nav, 3100.0, cfg);
            let v = nav.velocity_ned();
            nav.state.altitude -= v.z;
        }
        nav
    }

    #[test]
    fn altimeter_first_order_convergence() {
        let cfg = AltimeterConfig { velocity_gain: 0.0, ..Default::default() };
        // Five time constants of a 0.1 per-update gain.
        let nav = settle(&cfg, 50);
        assert!((nav.state.altitude - 3100.0).abs() < 1.0, "{}", nav.state.altitude);
        assert_eq!(nav.state.body_velocity(), Vector3::zeros());
    }

    #[test]
    fn altimeter_with_velocity_feedback_converges() {
        let cfg = AltimeterConfig::default();
        let nav = settle(&cfg, 200);
        assert!((nav.state.altitude - 3100.0).abs() < 1.0, "{}", nav.state.altitude);
        let u = nav.state.body_velocity();
        assert_eq!((u.x, u.y), (0.0, 0.0));
    }
}
