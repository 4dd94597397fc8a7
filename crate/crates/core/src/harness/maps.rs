use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{MapSpec, SyntheticMapConfig};
use crate::error::{Error, Result};
use crate::geodesy::WGS84;
use crate::gravmap::{load_grid, synthesize_grid, GridExtent, MapSet, PointMassSpec, SynthOptions, GRAVITATIONAL_CONSTANT};
use crate::trajectory::Route;

/// Point masses on a jittered lattice over a lat/lon box, each with a random
/// sign and a peak gradient between half and all of `peak` when seen from
/// `reference_altitude` directly above.
pub fn random_masses(
    lat: [f64; 2],
    lon: [f64; 2],
    spacing: f64,
    depth: [f64; 2],
    peak: f64,
    reference_altitude: f64,
    rng: &mut impl Rng,
) -> Vec<PointMassSpec> {
    let mid = 0.5 * (lat[0] + lat[1]);
    let (rn, re) = WGS84.radii_of_curvature(mid);
    let d_lat = (spacing / rn).to_degrees();
    let d_lon = (spacing / (re * mid.to_radians().cos())).to_degrees();
    let rows = ((lat[1] - lat[0]) / d_lat).ceil() as usize + 1;
    let cols = ((lon[1] - lon[0]) / d_lon).ceil() as usize + 1;
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let la = lat[0] + (i as f64 + rng.random::<f64>() - 0.5) * d_lat;
            let lo = lon[0] + (j as f64 + rng.random::<f64>() - 0.5) * d_lon;
            let dep = depth[0] + rng.random::<f64>() * (depth[1] - depth[0]);
            let amp = peak * (0.5 + 0.5 * rng.random::<f64>());
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let h = dep + reference_altitude;
            out.push(PointMassSpec {
                lat: la,
                lon: lo,
                depth: dep,
                mass: sign * amp * h.powi(3) / (2.0 * GRAVITATIONAL_CONSTANT),
            });
        }
    }
    out
}

fn within(masses: &[PointMassSpec], lat: [f64; 2], lon: [f64; 2]) -> Vec<PointMassSpec> {
    masses
        .iter()
        .filter(|m| m.lat >= lat[0] && m.lat <= lat[1] && m.lon >= lon[0] && m.lon <= lon[1])
        .copied()
        .collect()
}

fn margin_deg(metres: f64, lat: f64) -> (f64, f64) {
    let (rn, re) = WGS84.radii_of_curvature(lat);
    ((metres / rn).to_degrees(), (metres / (re * lat.to_radians().cos())).to_degrees())
}

/// Longitude span of the route between two latitudes.
fn route_lon_span(route: &Route, lat: [f64; 2]) -> Option<[f64; 2]> {
    let mut span: Option<[f64; 2]> = None;
    for p in &route.waypoints {
        if p.latitude >= lat[0] && p.latitude <= lat[1] {
            let s = span.get_or_insert([p.longitude, p.longitude]);
            s[0] = s[0].min(p.longitude);
            s[1] = s[1].max(p.longitude);
        }
    }
    span
}

/// Builds the coarse grid and the fine route tiles.
pub fn synthetic_map_set(cfg: &SyntheticMapConfig, route: &Route) -> Result<MapSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mlat, mlon) = margin_deg(cfg.deep_cutoff, cfg.coarse_lat[1]);
    let deep = random_masses(
        [cfg.coarse_lat[0] - mlat, cfg.coarse_lat[1] + mlat],
        [cfg.coarse_lon[0] - mlon, cfg.coarse_lon[1] + mlon],
        cfg.deep_spacing,
        cfg.deep_depth,
        cfg.deep_peak,
        cfg.reference_altitude,
        &mut rng,
    );
    let coarse_opts = SynthOptions {
        reference_altitude: cfg.reference_altitude,
        background: cfg.background,
        priority: 0,
        cutoff_radius: Some(cfg.deep_cutoff),
    };
    let extent = GridExtent::covering(
        cfg.coarse_lat[0],
        cfg.coarse_lat[1],
        cfg.coarse_lon[0],
        cfg.coarse_lon[1],
        cfg.coarse_spacing,
        cfg.coarse_spacing,
    );
    let coarse = synthesize_grid(&deep, &extent, &coarse_opts)?;

    let lat_lo = route.waypoints.iter().map(|p| p.latitude).fold(f64::INFINITY, f64::min);
    let lat_hi = route.waypoints.iter().map(|p| p.latitude).fold(f64::NEG_INFINITY, f64::max);
    let lon_lo = route.waypoints.iter().map(|p| p.longitude).fold(f64::INFINITY, f64::min);
    let lon_hi = route.waypoints.iter().map(|p| p.longitude).fold(f64::NEG_INFINITY, f64::max);
    let (slat, slon) = margin_deg(cfg.shallow_cutoff, lat_hi);
    let pad = cfg.corridor_half_width;
    let shallow = random_masses(
        [lat_lo - pad - slat, lat_hi + pad + slat],
        [lon_lo - pad - slon, lon_hi + pad + slon],
        cfg.shallow_spacing,
        cfg.shallow_depth,
        cfg.shallow_peak,
        cfg.reference_altitude,
        &mut rng,
    );

    let fine_opts = SynthOptions { priority: 1, cutoff_radius: Some(cfg.shallow_cutoff), ..coarse_opts };
    let mut grids = Vec::new();
    let mut band = lat_lo - pad;
    while band < lat_hi + pad {
        let lat = [band, band + cfg.tile_height];
        band += cfg.tile_height;
        if cfg.gaps.iter().any(|g| lat[1] > g[0] && lat[0] < g[1]) {
            continue;
        }
        let Some(span) = route_lon_span(route, [lat[0] - pad, lat[1] + pad]) else {
            continue;
        };
        let lon = [span[0] - pad, span[1] + pad];
        let (dlat, dlon) = margin_deg(cfg.shallow_cutoff, lat[1]);
        let near = within(&shallow, [lat[0] - dlat, lat[1] + dlat], [lon[0] - dlon, lon[1] + dlon]);
        let extent = GridExtent::covering(lat[0], lat[1], lon[0], lon[1], cfg.fine_spacing, cfg.fine_spacing);
        let mut tile = synthesize_grid(&near, &extent, &SynthOptions { background: 0.0, ..fine_opts })?;
        // The deep field is smooth enough to take from the coarse grid.
        for i in 0..tile.n_rows {
            for j in 0..tile.n_cols {
                let (la, lo) = (tile.node_lat(i), tile.node_lon(j));
                tile.values[i * tile.n_cols + j] += coarse.bilinear(la, lo).ok_or(Error::OutOfCoverage { lat: la, lon: lo })?;
            }
        }
        tile.validate()?;
        grids.push(tile);
    }
    grids.push(coarse);
    Ok(MapSet::new(grids))
}

/// Resolves a map description into a map set.
pub fn build_map_set(spec: &MapSpec, route: &Route) -> Result<MapSet> {
    match spec {
        MapSpec::Synthetic(cfg) => synthetic_map_set(cfg, route),
        MapSpec::Files { files } => Ok(MapSet::new(files.iter().map(load_grid).collect::<Result<Vec<_>>>()?)),
    }
}
