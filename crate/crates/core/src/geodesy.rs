//! WGS84 ellipsoid, local North-East-Down frames and the Earth-rate terms used
//! by trajectory synthesis and strapdown mechanization.
//!
//! Positions cross the public API as geodetic latitude/longitude in degrees and
//! altitude in metres above the ellipsoid. Everything is converted to radians
//! internally; no other module needs to care.
//!
//! The local NED mapping is the curvilinear one used in local-navigation-frame
//! INS work: offsets are scaled by the meridian and prime-vertical radii at the
//! origin. It is exactly invertible, which keeps round trips at the rounding
//! level, and is accurate to first order for offsets of a few tens of km.

use nalgebra::Vector3;

/// Semi-major axis of WGS84 (m).
pub const WGS84_SEMI_MAJOR_AXIS: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_FLATTENING: f64 = 1.0 / 298.257_223_563;
/// WGS84 Earth rotation rate (rad/s).
pub const WGS84_EARTH_RATE: f64 = 7.292_115e-5;
/// Normal gravity at the equator (m/s²).
pub const WGS84_GRAVITY_EQUATOR: f64 = 9.780_325_335_9;
/// Normal gravity at the poles (m/s²).
pub const WGS84_GRAVITY_POLE: f64 = 9.832_184_937_9;
/// Linear free-air gradient of normal gravity (s⁻²).
pub const FREE_AIR_GRADIENT: f64 = 3.086e-6;
/// Standard gravity used for micro-g conversions (m/s²).
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// Reference ellipsoid plus the constants of the closed-form normal gravity formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipsoidModel {
    pub semi_major_axis: f64,
    pub flattening: f64,
    pub earth_rotation_rate: f64,
    pub gravity_equator: f64,
    pub gravity_pole: f64,
    pub free_air_gradient: f64,
}

pub const WGS84: EllipsoidModel = EllipsoidModel {
    semi_major_axis: WGS84_SEMI_MAJOR_AXIS,
    flattening: WGS84_FLATTENING,
    earth_rotation_rate: WGS84_EARTH_RATE,
    gravity_equator: WGS84_GRAVITY_EQUATOR,
    gravity_pole: WGS84_GRAVITY_POLE,
    free_air_gradient: FREE_AIR_GRADIENT,
};

impl Default for EllipsoidModel {
    fn default() -> Self {
        WGS84
    }
}

impl EllipsoidModel {
    pub fn eccentricity_squared(&self) -> f64 {
        self.flattening * (2.0 - self.flattening)
    }

    pub fn semi_minor_axis(&self) -> f64 {
        self.semi_major_axis * (1.0 - self.flattening)
    }

    /// Somigliana normal gravity on the ellipsoid with a linear free-air
    /// height correction. Returns the downward magnitude in m/s².
    pub fn normal_gravity(&self, lat_deg: f64, alt: f64) -> f64 {
        let a = self.semi_major_axis;
        let b = self.semi_minor_axis();
        let e2 = self.eccentricity_squared();
        let k = (b * self.gravity_pole - a * self.gravity_equator) / (a * self.gravity_equator);
        let s2 = lat_deg.to_radians().sin().powi(2);
        let surface = self.gravity_equator * (1.0 + k * s2) / (1.0 - e2 * s2).sqrt();
        surface - self.free_air_gradient * alt
    }

    /// Meridian (north-south) and prime-vertical (east-west) radii of curvature in metres.
    pub fn radii_of_curvature(&self, lat_deg: f64) -> (f64, f64) {
        let e2 = self.eccentricity_squared();
        let s2 = lat_deg.to_radians().sin().powi(2);
        let w2 = 1.0 - e2 * s2;
        let prime_vertical = self.semi_major_axis / w2.sqrt();
        let meridian = self.semi_major_axis * (1.0 - e2) / (w2 * w2.sqrt());
        (meridian, prime_vertical)
    }

    /// Earth rotation vector resolved in NED at the given latitude.
    pub fn earth_rate_ned(&self, lat_deg: f64) -> Vector3<f64> {
        let (s, c) = lat_deg.to_radians().sin_cos();
        Vector3::new(
            self.earth_rotation_rate * c,
            0.0,
            -self.earth_rotation_rate * s,
        )
    }

    /// Rotation rate of the NED frame with respect to the Earth caused by
    /// motion over the curved surface.
    pub fn transport_rate_ned(&self, v_ned: &Vector3<f64>, lat_deg: f64, alt: f64) -> Vector3<f64> {
        let (rn, re) = self.radii_of_curvature(lat_deg);
        let tan_lat = lat_deg.to_radians().tan();
        Vector3::new(
            v_ned.y / (re + alt),
            -v_ned.x / (rn + alt),
            -v_ned.y * tan_lat / (re + alt),
        )
    }

    /// Earth-centred Earth-fixed coordinates of a geodetic position.
    pub fn to_ecef(&self, pos: &GeodeticPosition) -> Vector3<f64> {
        let e2 = self.eccentricity_squared();
        let (sl, cl) = pos.latitude.to_radians().sin_cos();
        let (so, co) = pos.longitude.to_radians().sin_cos();
        let n = self.semi_major_axis / (1.0 - e2 * sl * sl).sqrt();
        Vector3::new(
            (n + pos.altitude) * cl * co,
            (n + pos.altitude) * cl * so,
            (n * (1.0 - e2) + pos.altitude) * sl,
        )
    }

    /// Local NED offset of `point` from `origin`.
    pub fn geodetic_to_ned(&self, origin: &GeodeticPosition, point: &GeodeticPosition) -> NedVector {
        let (north_scale, east_scale) = self.metres_per_radian(origin);
        let dlat = (point.latitude - origin.latitude).to_radians();
        let dlon = wrap_longitude(point.longitude - origin.longitude).to_radians();
        NedVector {
            north: dlat * north_scale,
            east: dlon * east_scale,
            down: origin.altitude - point.altitude,
        }
    }

    /// Inverse of [`geodetic_to_ned`](Self::geodetic_to_ned).
    pub fn ned_to_geodetic(&self, origin: &GeodeticPosition, delta: &NedVector) -> GeodeticPosition {
        let (north_scale, east_scale) = self.metres_per_radian(origin);
        GeodeticPosition {
            latitude: origin.latitude + (delta.north / north_scale).to_degrees(),
            longitude: wrap_longitude(origin.longitude + (delta.east / east_scale).to_degrees()),
            altitude: origin.altitude - delta.down,
        }
    }

    /// Metres per radian of latitude and of longitude at a position.
    fn metres_per_radian(&self, origin: &GeodeticPosition) -> (f64, f64) {
        let (rn, re) = self.radii_of_curvature(origin.latitude);
        let cos_lat = origin.latitude.to_radians().cos();
        (rn + origin.altitude, (re + origin.altitude) * cos_lat)
    }
}

/// Geodetic position: degrees, degrees, metres above the ellipsoid.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeodeticPosition {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
}

impl GeodeticPosition {
    /// Builds a position, wrapping longitude into (-180, 180]. Returns `None`
    /// for latitudes outside [-90, 90] or non-finite components.
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Option<Self> {
        if !(latitude.is_finite() && longitude.is_finite() && altitude.is_finite()) {
            return None;
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return None;
        }
        Some(Self {
            latitude,
            longitude: wrap_longitude(longitude),
            altitude,
        })
    }
}

/// Offset in a local North-East-Down frame (metres).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NedVector {
    pub north: f64,
    pub east: f64,
    pub down: f64,
}

impl NedVector {
    pub fn new(north: f64, east: f64, down: f64) -> Self {
        Self { north, east, down }
    }

    pub fn norm(&self) -> f64 {
        (self.north * self.north + self.east * self.east + self.down * self.down).sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.north.hypot(self.east)
    }
}

impl From<NedVector> for Vector3<f64> {
    fn from(v: NedVector) -> Self {
        Vector3::new(v.north, v.east, v.down)
    }
}

impl From<Vector3<f64>> for NedVector {
    fn from(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Wraps a longitude (or any angle in degrees) into (-180, 180].
pub fn wrap_longitude(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

pub fn normal_gravity(lat_deg: f64, alt: f64) -> f64 {
    WGS84.normal_gravity(lat_deg, alt)
}

pub fn radii_of_curvature(lat_deg: f64) -> (f64, f64) {
    WGS84.radii_of_curvature(lat_deg)
}

pub fn geodetic_to_ned(origin: &GeodeticPosition, point: &GeodeticPosition) -> NedVector {
    WGS84.geodetic_to_ned(origin, point)
}

pub fn ned_to_geodetic(origin: &GeodeticPosition, delta: &NedVector) -> GeodeticPosition {
    WGS84.ned_to_geodetic(origin, delta)
}

pub fn earth_rate_ned(lat_deg: f64) -> Vector3<f64> {
    WGS84.earth_rate_ned(lat_deg)
}

pub fn transport_rate_ned(v_ned: &Vector3<f64>, lat_deg: f64, alt: f64) -> Vector3<f64> {
    WGS84.transport_rate_ned(v_ned, lat_deg, alt)
}

/// Length of the great-ellipse path between two positions, integrated
/// numerically along the same curve the trajectory generator flies.
pub fn route_distance(a: &GeodeticPosition, b: &GeodeticPosition) -> f64 {
    GreatEllipse::new(WGS84, a, b).length()
}

const GAUSS_LEGENDRE_5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

const ARC_PANELS: usize = 512;

/// Position on a [`GreatEllipse`] together with its derivatives with respect
/// to the path parameter.
#[derive(Clone, Copy, Debug)]
pub struct PathPoint {
    pub position: GeodeticPosition,
    /// d(latitude)/ds in rad.
    pub dlat: f64,
    /// d(longitude)/ds in rad.
    pub dlon: f64,
    /// d(altitude)/ds in metres.
    pub dalt: f64,
}

/// Intersection of the ellipsoid with the plane through its centre and two
/// surface points, lifted along the normal to a linearly interpolated altitude.
///
/// The path parameter `s` runs from 0 at the start to 1 at the end; the
/// geocentric direction is slerped so the curve stays in the plane.
#[derive(Clone, Debug)]
pub struct GreatEllipse {
    ellipsoid: EllipsoidModel,
    u0: Vector3<f64>,
    u1: Vector3<f64>,
    angle: f64,
    alt0: f64,
    alt1: f64,
    cumulative: Vec<f64>,
}

impl GreatEllipse {
    pub fn new(ellipsoid: EllipsoidModel, start: &GeodeticPosition, end: &GeodeticPosition) -> Self {
        let surface = |p: &GeodeticPosition| {
            ellipsoid
                .to_ecef(&GeodeticPosition {
                    altitude: 0.0,
                    ..*p
                })
                .normalize()
        };
        let u0 = surface(start);
        let mut u1 = surface(end);
        let angle = u0.dot(&u1).clamp(-1.0, 1.0).acos();
        if (std::f64::consts::PI - angle) < 1e-9 {
            // Antipodal: every plane through the axis works; take the meridian one.
            let axis = if u0.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
            let perp = (axis - u0 * u0.dot(&axis)).normalize();
            u1 = -u0 * (1.0 - 1e-12) + perp * 1e-6;
            u1.normalize_mut();
        }
        let angle = u0.dot(&u1).clamp(-1.0, 1.0).acos();
        let mut path = Self {
            ellipsoid,
            u0,
            u1,
            angle,
            alt0: start.altitude,
            alt1: end.altitude,
            cumulative: Vec::new(),
        };
        let mut cumulative = Vec::with_capacity(ARC_PANELS + 1);
        cumulative.push(0.0);
        let h = 1.0 / ARC_PANELS as f64;
        let mut acc = 0.0;
        for i in 0..ARC_PANELS {
            acc += path.integrate(i as f64 * h, (i + 1) as f64 * h);
            cumulative.push(acc);
        }
        path.cumulative = cumulative;
        path
    }

    /// Total path length in metres.
    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    fn direction(&self, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        if self.angle < 1e-15 {
            return (self.u0, Vector3::zeros());
        }
        let w = self.angle;
        let sin_w = w.sin();
        let (sa, ca) = ((1.0 - s) * w).sin_cos();
        let (sb, cb) = (s * w).sin_cos();
        let u = (self.u0 * sa + self.u1 * sb) / sin_w;
        let du = (self.u1 * cb - self.u0 * ca) * (w / sin_w);
        (u, du)
    }

    pub fn point(&self, s: f64) -> PathPoint {
        let (u, du) = self.direction(s);
        let k = 1.0 - self.ellipsoid.eccentricity_squared();
        let rho2 = u.x * u.x + u.y * u.y;
        let rho = rho2.sqrt();
        let drho = (u.x * du.x + u.y * du.y) / rho;
        let lat = u.z.atan2(k * rho);
        let lon = u.y.atan2(u.x);
        let dlat = k * (rho * du.z - u.z * drho) / (k * k * rho2 + u.z * u.z);
        let dlon = (u.x * du.y - u.y * du.x) / rho2;
        PathPoint {
            position: GeodeticPosition {
                latitude: lat.to_degrees(),
                longitude: lon.to_degrees(),
                altitude: self.alt0 + s * (self.alt1 - self.alt0),
            },
            dlat,
            dlon,
            dalt: self.alt1 - self.alt0,
        }
    }

    /// |dP/ds| in metres per unit parameter.
    pub fn speed(&self, s: f64) -> f64 {
        let p = self.point(s);
        let (rn, re) = self.ellipsoid.radii_of_curvature(p.position.latitude);
        let h = p.position.altitude;
        let cos_lat = p.position.latitude.to_radians().cos();
        let vn = (rn + h) * p.dlat;
        let ve = (re + h) * cos_lat * p.dlon;
        (vn * vn + ve * ve + p.dalt * p.dalt).sqrt()
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GAUSS_LEGENDRE_5
            .iter()
            .map(|&(x, w)| w * self.speed(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Arc length from the start to parameter `s`.
    pub fn arc_length(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let panel = ((s * ARC_PANELS as f64) as usize).min(ARC_PANELS - 1);
        let s0 = panel as f64 / ARC_PANELS as f64;
        self.cumulative[panel] + self.integrate(s0, s)
    }

    /// Path parameter at which the arc length equals `length` (Newton on the
    /// cumulative table).
    pub fn parameter_at_length(&self, length: f64) -> f64 {
        let total = self.length();
        if total <= 0.0 {
            return 0.0;
        }
        let length = length.clamp(0.0, total);
        let panel = self
            .cumulative
            .partition_point(|&c| c <= length)
            .saturating_sub(1)
            .min(ARC_PANELS - 1);
        let (c0, c1) = (self.cumulative[panel], self.cumulative[panel + 1]);
        let h = 1.0 / ARC_PANELS as f64;
        let mut s = (panel as f64 + (length - c0) / (c1 - c0).max(f64::MIN_POSITIVE)) * h;
        for _ in 0..8 {
            let residual = self.arc_length(s) - length;
            let step = residual / self.speed(s);
            s = (s - step).clamp(0.0, 1.0);
            if step.abs() < 1e-15 {
                break;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pos(lat: f64, lon: f64, alt: f64) -> GeodeticPosition {
        GeodeticPosition::new(lat, lon, alt).unwrap()
    }

    #[test]
    fn somigliana_end_points() {
        assert!((normal_gravity(0.0, 0.0) - 9.780_325_335_9).abs() < 1e-9);
        assert!((normal_gravity(90.0, 0.0) - 9.832_184_937_9).abs() < 1e-9);
        assert!((normal_gravity(-90.0, 0.0) - 9.832_184_937_9).abs() < 1e-9);
    }

    #[test]
    fn free_air_drop() {
        let drop = normal_gravity(45.0, 0.0) - normal_gravity(45.0, 3000.0);
        assert_relative_eq!(drop, 9.258e-3, max_relative = 1e-3);
    }

    #[test]
    fn gravity_monotonic() {
        let mut prev = normal_gravity(0.0, 0.0);
        for i in 1..=90 {
            let g = normal_gravity(i as f64, 0.0);
            assert!(g > prev);
            assert_eq!(g, normal_gravity(-(i as f64), 0.0));
            prev = g;
        }
        let mut prev = normal_gravity(30.0, 0.0);
        for h in (500..=10_000).step_by(500) {
            let g = normal_gravity(30.0, h as f64);
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn radii_at_equator_and_pole() {
        let (rn, re) = radii_of_curvature(0.0);
        assert_eq!(re, WGS84_SEMI_MAJOR_AXIS);
        let e2 = WGS84.eccentricity_squared();
        assert_relative_eq!(rn, WGS84_SEMI_MAJOR_AXIS * (1.0 - e2), max_relative = 1e-15);
        assert!((rn - 6_335_439.3).abs() < 0.1);
        let (rn, re) = radii_of_curvature(90.0);
        assert_relative_eq!(rn, re, max_relative = 1e-14);
        for lat in [0.0, 15.0, 45.0, 80.0] {
            let (rn, re) = radii_of_curvature(lat);
            assert!(re >= WGS84_SEMI_MAJOR_AXIS && rn > 0.0);
        }
    }

    #[test]
    fn ned_examples() {
        let o = pos(0.0, 10.0, 0.0);
        assert_eq!(geodetic_to_ned(&o, &o), NedVector::default());
        let n = geodetic_to_ned(&o, &pos(1.0, 10.0, 0.0));
        let (rn, _) = radii_of_curvature(0.0);
        assert_relative_eq!(n.north, rn * 1f64.to_radians(), max_relative = 1e-12);
        assert!((n.north - 110_574.0).abs() < 1.0);
        assert_eq!(n.east, 0.0);
        let d = geodetic_to_ned(&o, &pos(0.0, 10.0, -10.0));
        assert_eq!(d.down, 10.0);

        assert_eq!(ned_to_geodetic(&o, &NedVector::default()), o);
        let up = ned_to_geodetic(&o, &NedVector::new(0.0, 0.0, -100.0));
        assert_eq!(up.altitude, 100.0);
    }

    #[test]
    fn ned_across_dateline() {
        let o = pos(10.0, 179.99, 0.0);
        let p = pos(10.0, -179.99, 0.0);
        let d = geodetic_to_ned(&o, &p);
        assert!(d.east > 0.0 && d.east < 3000.0);
        let back = ned_to_geodetic(&o, &d);
        assert!((back.longitude - p.longitude).abs() < 1e-9);
    }

    #[test]
    fn earth_rate_geometry() {
        let pole = earth_rate_ned(90.0);
        assert!(pole.x.abs() < 1e-20 && pole.y == 0.0);
        assert_relative_eq!(pole.z, -WGS84_EARTH_RATE, max_relative = 1e-15);
        assert_eq!(earth_rate_ned(0.0), Vector3::new(WGS84_EARTH_RATE, 0.0, 0.0));
    }

    #[test]
    fn transport_rate_examples() {
        assert_eq!(transport_rate_ned(&Vector3::zeros(), 45.0, 3000.0), Vector3::zeros());
        let (rn, _) = radii_of_curvature(0.0);
        let w = transport_rate_ned(&Vector3::new(100.0, 0.0, 0.0), 0.0, 0.0);
        assert_eq!(w, Vector3::new(0.0, -100.0 / rn, 0.0));
        let w = transport_rate_ned(&Vector3::new(0.0, 100.0, 0.0), 0.0, 0.0);
        assert_eq!(w.z, 0.0);
    }

    #[test]
    fn liverpool_to_toulouse() {
        let a = pos(53.407579, -2.967853, 0.0);
        let b = pos(43.604652, 1.444209, 0.0);
        let d = route_distance(&a, &b);
        assert!((d - 1.137e6).abs() < 0.005 * 1.137e6, "distance {d}");
        assert_relative_eq!(d, route_distance(&b, &a), max_relative = 1e-9);
        assert_eq!(route_distance(&a, &a), 0.0);
    }

    #[test]
    fn equatorial_degree() {
        let d = route_distance(&pos(0.0, 0.0, 0.0), &pos(0.0, 1.0, 0.0));
        assert_relative_eq!(d, WGS84_SEMI_MAJOR_AXIS * 1f64.to_radians(), max_relative = 1e-9);
        assert!((d - 111_319.0).abs() < 1.0);
    }

    #[test]
    fn meridian_arc_matches_quadrature_of_radius() {
        // Independent oracle: Simpson integration of R_N over latitude.
        let n = 2000;
        let (l0, l1) = (10f64, 40f64);
        let h = (l1 - l0) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * radii_of_curvature(l0 + i as f64 * h).0;
        }
        let oracle = acc * h.to_radians() / 3.0;
        let d = route_distance(&pos(l0, 5.0, 0.0), &pos(l1, 5.0, 0.0));
        assert_relative_eq!(d, oracle, max_relative = 1e-9);
    }

    #[test]
    fn path_parameter_inverts_arc_length() {
        let path = GreatEllipse::new(WGS84, &pos(53.4, -2.9, 3000.0), &pos(43.6, 1.4, 3000.0));
        for target in [0.0, 100.0, 123_456.7, 900_000.0] {
            let s = path.parameter_at_length(target);
            assert!((path.arc_length(s) - target).abs() < 1e-6);
        }
        let end = path.point(1.0).position;
        assert!((end.latitude - 43.6).abs() < 1e-9 && (end.longitude - 1.4).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn ned_round_trip(lat in -70.0f64..70.0, lon in -179.0f64..179.0, alt in 0.0f64..5000.0,
                          n in -10_000.0f64..10_000.0, e in -10_000.0f64..10_000.0, d in -500.0f64..500.0) {
            let o = pos(lat, lon, alt);
            let delta = NedVector::new(n, e, d);
            let back = geodetic_to_ned(&o, &ned_to_geodetic(&o, &delta));
            prop_assert!((back.north - n).abs() < 1e-6);
            prop_assert!((back.east - e).abs() < 1e-6);
            prop_assert!((back.down - d).abs() < 1e-6);
        }

        #[test]
        fn earth_rate_magnitude(lat in -90.0f64..90.0) {
            prop_assert!((earth_rate_ned(lat).norm() - WGS84_EARTH_RATE).abs() < 1e-18);
        }

        #[test]
        fn transport_rate_linear(vn in -300.0f64..300.0, ve in -300.0f64..300.0, lat in -80.0f64..80.0) {
            let v = Vector3::new(vn, ve, 0.0);
            let w1 = transport_rate_ned(&v, lat, 1000.0);
            let w2 = transport_rate_ned(&(v * 2.0), lat, 1000.0);
            prop_assert!((w2 - w1 * 2.0).norm() <= 1e-15 * w2.norm().max(1e-30));
        }
    }
}
