//! Rotation helpers shared by trajectory synthesis and mechanization.
//!
//! Euler angles follow the aerospace Z-Y-X sequence (heading, pitch, roll).
//! `dcm_from_euler` returns the body-to-NED matrix.

use nalgebra::{Matrix3, Vector3};

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Body-to-NED direction cosine matrix from heading, pitch and roll in radians.
pub fn dcm_from_euler(psi: f64, theta: f64, phi: f64) -> Matrix3<f64> {
    let (sps, cps) = psi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let (sph, cph) = phi.sin_cos();
    Matrix3::new(
        cth * cps,
        -cph * sps + sph * sth * cps,
        sph * sps + cph * sth * cps,
        cth * sps,
        cph * cps + sph * sth * sps,
        -sph * cps + cph * sth * sps,
        -sth,
        sph * cth,
        cph * cth,
    )
}

/// Heading, pitch and roll in radians; heading in [0, 2π).
pub fn euler_from_dcm(c: &Matrix3<f64>) -> (f64, f64, f64) {
    let theta = (-c[(2, 0)]).clamp(-1.0, 1.0).asin();
    let phi = c[(2, 1)].atan2(c[(2, 2)]);
    let psi = c[(1, 0)].atan2(c[(0, 0)]).rem_euclid(std::f64::consts::TAU);
    (psi, theta, phi)
}

/// Rotation matrix for a rotation vector (Rodrigues).
pub fn so3_exp(v: &Vector3<f64>) -> Matrix3<f64> {
    let angle2 = v.norm_squared();
    let k = skew(v);
    let (a, b) = if angle2 < 1e-12 {
        (1.0 - angle2 / 6.0, 0.5 - angle2 / 24.0)
    } else {
        let angle = angle2.sqrt();
        (angle.sin() / angle, (1.0 - angle.cos()) / angle2)
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation vector of a rotation matrix with angle below π.
pub fn so3_log(c: &Matrix3<f64>) -> Vector3<f64> {
    let w = Vector3::new(c[(2, 1)] - c[(1, 2)], c[(0, 2)] - c[(2, 0)], c[(1, 0)] - c[(0, 1)]) * 0.5;
    let s = w.norm();
    let cos = ((c.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = s.atan2(cos);
    if s < 1e-12 {
        w * (1.0 + angle * angle / 6.0)
    } else {
        w * (angle / s)
    }
}

/// Body rates relative to NED from Euler angle rates.
pub fn euler_rates_to_body(rates: &Vector3<f64>, theta: f64, phi: f64) -> Vector3<f64> {
    let (psi_dot, theta_dot, phi_dot) = (rates.x, rates.y, rates.z);
    let (sth, cth) = theta.sin_cos();
    let (sph, cph) = phi.sin_cos();
    Vector3::new(
        phi_dot - psi_dot * sth,
        theta_dot * cph + psi_dot * cth * sph,
        -theta_dot * sph + psi_dot * cth * cph,
    )
}

/// Wraps an angle in degrees into [0, 360).
pub fn wrap_heading_deg(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Smallest signed difference `a - b` between two angles in degrees.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_and_heading() {
        assert!((dcm_from_euler(0.0, 0.0, 0.0) - Matrix3::identity()).norm() < 1e-15);
        let c = dcm_from_euler(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let east = c * Vector3::x();
        assert!((east - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn angle_helpers() {
        assert_eq!(wrap_heading_deg(-10.0), 350.0);
        assert_eq!(angle_diff_deg(359.0, 1.0), -2.0);
        assert_eq!(angle_diff_deg(1.0, 359.0), 2.0);
    }

    proptest! {
        #[test]
        fn euler_round_trip(psi in 0.0f64..6.2, theta in -1.5f64..1.5, phi in -3.1f64..3.1) {
            let (a, b, c) = euler_from_dcm(&dcm_from_euler(psi, theta, phi));
            prop_assert!((a - psi).abs() < 1e-9 && (b - theta).abs() < 1e-9 && (c - phi).abs() < 1e-9);
        }

        #[test]
        fn exp_log_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, scale in 1e-9f64..2.0) {
            let v = Vector3::new(x, y, z) * scale;
            let r = so3_exp(&v);
            prop_assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-13);
            prop_assert!((so3_log(&r) - v).norm() < 1e-12 * (1.0 + v.norm()));
        }
    }
}
