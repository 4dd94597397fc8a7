//! WGS84 normal gravity, local NED offsets and the route length.

use gravfix::geodesy::{normal_gravity, route_distance, NedVector, WGS84};
use gravfix::harness::ScenarioConfig;

fn main() {
    for lat in [0.0, 30.0, 45.0, 53.4, 90.0] {
        println!("gravity at {lat:>5.1} deg: {:.7} m/s^2", normal_gravity(lat, 0.0));
    }
    println!("gravity at 45 deg, 3 km: {:.7} m/s^2", normal_gravity(45.0, 3000.0));

    let route = ScenarioConfig::default().route;
    let origin = route.start;
    let offset = NedVector::new(12_500.0, -4_000.0, -250.0);
    let moved = WGS84.ned_to_geodetic(&origin, &offset);
    let back = WGS84.geodetic_to_ned(&origin, &moved);
    println!(
        "moved to {:.6}, {:.6}, {:.1} m; round trip error {:.2e} m",
        moved.latitude,
        moved.longitude,
        moved.altitude,
        (back.north - offset.north).abs().max((back.east - offset.east).abs())
    );

    let (rm, rn) = WGS84.radii_of_curvature(origin.latitude);
    println!("meridian radius {rm:.0} m, transverse radius {rn:.0} m");
    println!("route length {:.1} km", route_distance(&route.start, &route.end) / 1000.0);
}
