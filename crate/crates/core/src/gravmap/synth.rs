//! Analytic gradient fields from buried point masses.

use std::path::Path;

use rayon::prelude::*;

use super::grid::GravityGradientGrid;
use crate::error::{Error, Result};
use crate::geodesy::WGS84;

/// Newtonian constant of gravitation (m³ kg⁻¹ s⁻²).
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;
/// Background vertical gradient added to every synthetic node (s⁻²).
pub const BACKGROUND_GRADIENT: f64 = 3.07e-6;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PointMassSpec {
    pub lat: f64,
    pub lon: f64,
    /// Metres below the ellipsoid surface.
    pub depth: f64,
    /// Kilograms; negative values model mass deficits.
    pub mass: f64,
}

impl PointMassSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0 && self.depth.is_finite()) {
            return Err(Error::Config(format!("point mass depth must be positive, got {}", self.depth)));
        }
        if self.mass == 0.0 || !self.mass.is_finite() {
            return Err(Error::Config(format!("point mass must be non-zero and finite, got {}", self.mass)));
        }
        if !(-90.0..=90.0).contains(&self.lat) || !self.lon.is_finite() {
            return Err(Error::Config(format!("bad point mass location ({}, {})", self.lat, self.lon)));
        }
        Ok(())
    }
}

/// Second vertical derivative of a point-mass potential, down-positive.
///
/// `rho` is the horizontal offset and `h` the vertical distance from the
/// observation point down to the mass.
#[inline]
pub fn point_mass_gradient(mass: f64, rho: f64, h: f64) -> f64 {
    let r2 = rho * rho + h * h;
    let r = r2.sqrt();
    GRAVITATIONAL_CONSTANT * mass * (2.0 * h * h - rho * rho) / (r2 * r2 * r)
}

/// Down-positive vertical gravity of a point mass, used as a test oracle.
pub fn point_mass_gz(mass: f64, rho: f64, h: f64) -> f64 {
    let r2 = rho * rho + h * h;
    GRAVITATIONAL_CONSTANT * mass * h / (r2 * r2.sqrt())
}

/// Footprint and node spacing of a grid to synthesize.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridExtent {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub d_lat: f64,
    pub d_lon: f64,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl GridExtent {
    /// Smallest node lattice with the given spacing covering the box.
    pub fn covering(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64, d_lat: f64, d_lon: f64) -> Self {
        let n_rows = ((lat_max - lat_min) / d_lat - 1e-9).ceil().max(1.0) as usize + 1;
        let n_cols = ((lon_max - lon_min) / d_lon - 1e-9).ceil().max(1.0) as usize + 1;
        Self {
            origin_lat: lat_min,
            origin_lon: lon_min,
            d_lat,
            d_lon,
            n_rows,
            n_cols,
        }
    }
}

/// Options for [`synthesize_grid`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthOptions {
    pub reference_altitude: f64,
    pub background: f64,
    pub priority: i32,
    /// Masses farther than this horizontally are ignored, with a cosine
    /// taper over the outer fifth of the radius. `None` sums every mass.
    pub cutoff_radius: Option<f64>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            reference_altitude: 0.0,
            background: BACKGROUND_GRADIENT,
            priority: 0,
            cutoff_radius: None,
        }
    }
}

struct PreparedMass {
    lat: f64,
    lon: f64,
    north_scale: f64,
    east_scale: f64,
    h: f64,
    mass: f64,
}

/// Evaluates the point-mass field plus background at every node.
pub fn synthesize_grid(masses: &[PointMassSpec], extent: &GridExtent, opts: &SynthOptions) -> Result<GravityGradientGrid> {
    for m in masses {
        m.validate()?;
    }
    let mut prepared: Vec<PreparedMass> = masses
        .iter()
        .map(|m| {
            let (rn, re) = WGS84.radii_of_curvature(m.lat);
            PreparedMass {
                lat: m.lat,
                lon: m.lon,
                north_scale: rn.to_radians(),
                east_scale: (re * m.lat.to_radians().cos()).to_radians(),
                h: m.depth + opts.reference_altitude,
                mass: m.mass,
            }
        })
        .collect();
    prepared.sort_by(|a, b| a.lat.total_cmp(&b.lat));

    // Latitude half-window in degrees that safely contains the cutoff.
    let lat_window = opts.cutoff_radius.map(|r| r / 110_000.0 * 1.01);

    let rows: Vec<Result<Vec<f64>>> = (0..extent.n_rows)
        .into_par_iter()
        .map(|i| {
            let lat = extent.origin_lat + i as f64 * extent.d_lat;
            let slice = match lat_window {
                Some(w) => {
                    let lo = prepared.partition_point(|m| m.lat < lat - w);
                    let hi = prepared.partition_point(|m| m.lat <= lat + w);
                    &prepared[lo..hi]
                }
                None => &prepared[..],
            };
            // Within the band, order by longitude so each node scans a window.
            let mut band: Vec<&PreparedMass> = slice.iter().collect();
            band.sort_by(|a, b| a.lon.total_cmp(&b.lon));
            let lon_window = opts.cutoff_radius.map(|r| {
                let min_scale = band.iter().map(|m| m.east_scale).fold(f64::INFINITY, f64::min);
                r / min_scale * 1.01
            });
            let mut row = vec![opts.background; extent.n_cols];
            for (j, out) in row.iter_mut().enumerate() {
                let lon = extent.origin_lon + j as f64 * extent.d_lon;
                let near = match lon_window {
                    Some(w) if w < 90.0 && lon - w > -180.0 && lon + w < 180.0 => {
                        let lo = band.partition_point(|m| m.lon < lon - w);
                        let hi = band.partition_point(|m| m.lon <= lon + w);
                        &band[lo..hi]
                    }
                    _ => &band[..],
                };
                let mut acc = 0.0;
                for m in near {
                    let dn = (lat - m.lat) * m.north_scale;
                    let mut dlon = lon - m.lon;
                    if dlon.abs() > 180.0 {
                        dlon = crate::geodesy::wrap_longitude(dlon);
                    }
                    let de = dlon * m.east_scale;
                    let rho2 = dn * dn + de * de;
                    let taper = match opts.cutoff_radius {
                        Some(rc) => {
                            if rho2 >= rc * rc {
                                continue;
                            }
                            let rho = rho2.sqrt();
                            let inner = 0.8 * rc;
                            if rho > inner {
                                0.5 * (1.0 + (std::f64::consts::PI * (rho - inner) / (rc - inner)).cos())
                            } else {
                                1.0
                            }
                        }
                        None => 1.0,
                    };
                    let dist = (rho2 + m.h * m.h).sqrt();
                    if dist < 1.0 {
                        return Err(Error::DegenerateGeometry { distance: dist });
                    }
                    acc += taper * point_mass_gradient(m.mass, rho2.sqrt(), m.h);
                }
                *out += acc;
            }
            Ok(row)
        })
        .collect();

    let mut values = Vec::with_capacity(extent.n_rows * extent.n_cols);
    for row in rows {
        values.extend(row?);
    }
    GravityGradientGrid::new(
        extent.origin_lat,
        extent.origin_lon,
        extent.d_lat,
        extent.d_lon,
        extent.n_rows,
        extent.n_cols,
        opts.reference_altitude,
        opts.priority,
        values,
    )
}

/// Direct field sum at one location, without a grid.
pub fn direct_gradient(masses: &[PointMassSpec], lat: f64, lon: f64, reference_altitude: f64, background: f64) -> f64 {
    background
        + masses
            .iter()
            .map(|m| {
                let (rn, re) = WGS84.radii_of_curvature(m.lat);
                let dn = (lat - m.lat).to_radians() * rn;
                let de = crate::geodesy::wrap_longitude(lon - m.lon).to_radians() * re * m.lat.to_radians().cos();
                point_mass_gradient(m.mass, dn.hypot(de), m.depth + reference_altitude)
            })
            .sum::<f64>()
}

/// Parses a mass list: one `lat lon depth mass` record per line, `#` comments.
pub fn parse_mass_list(text: &str) -> Result<Vec<PointMassSpec>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if fields.len() != 4 {
            return Err(Error::Config(format!("mass list line {}: expected 4 fields, got {}", n + 1, fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| Error::Config(format!("mass list line {}: cannot parse {f:?}", n + 1)))?;
        }
        let spec = PointMassSpec {
            lat: v[0],
            lon: v[1],
            depth: v[2],
            mass: v[3],
        };
        spec.validate()
            .map_err(|e| Error::Config(format!("mass list line {}: {e}", n + 1)))?;
        out.push(spec);
    }
    Ok(out)
}

pub fn load_mass_list(path: impl AsRef<Path>) -> Result<Vec<PointMassSpec>> {
    parse_mass_list(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extent_around(lat: f64, lon: f64, half: f64, d: f64) -> GridExtent {
        GridExtent::covering(lat - half, lat + half, lon - half, lon + half, d, d)
    }

    #[test]
    fn no_masses_is_background() {
        let g = synthesize_grid(&[], &extent_around(50.0, 0.0, 0.1, 0.01), &SynthOptions::default()).unwrap();
        assert!(g.values.iter().all(|&v| v == 3.07e-6));
    }

    #[test]
    fn overhead_matches_closed_form() {
        let m = PointMassSpec { lat: 45.0, lon: 1.0, depth: 2000.0, mass: 5e12 };
        let opts = SynthOptions { reference_altitude: 1000.0, ..Default::default() };
        let ext = GridExtent { origin_lat: 45.0, origin_lon: 1.0, d_lat: 0.01, d_lon: 0.01, n_rows: 2, n_cols: 2 };
        let g = synthesize_grid(&[m], &ext, &opts).unwrap();
        let d = 3000.0f64;
        let expected = 3.07e-6 + 2.0 * GRAVITATIONAL_CONSTANT * 5e12 / d.powi(3);
        assert!((g.value(0, 0) - expected).abs() < 1e-20);
    }

    #[test]
    fn kernel_matches_finite_difference_of_gz() {
        // Moving the observer down (towards the mass) reduces h.
        for &(rho, h) in &[(0.0, 3000.0), (1500.0, 3000.0), (5000.0, 2000.0), (800.0, 4500.0)] {
            let step = 0.5;
            let fd = (point_mass_gz(1e12, rho, h - step) - point_mass_gz(1e12, rho, h + step)) / (2.0 * step);
            let k = point_mass_gradient(1e12, rho, h);
            assert!(((k - fd) / k).abs() < 1e-6, "rho={rho} h={h}: {k} vs {fd}");
        }
    }

    #[test]
    fn mirrored_pair_symmetric() {
        let masses = [
            PointMassSpec { lat: 48.0, lon: 0.05, depth: 1000.0, mass: 3e12 },
            PointMassSpec { lat: 48.0, lon: -0.05, depth: 1000.0, mass: 3e12 },
        ];
        let ext = GridExtent::covering(47.9, 48.1, -0.1, 0.1, 0.01, 0.01);
        let g = synthesize_grid(&masses, &ext, &SynthOptions::default()).unwrap();
        for i in 0..g.n_rows {
            for j in 0..g.n_cols {
                let mirror = g.value(i, g.n_cols - 1 - j);
                assert!((g.value(i, j) - mirror).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn node_on_mass_is_degenerate() {
        let m = PointMassSpec { lat: 45.0, lon: 1.0, depth: 0.5, mass: 1e10 };
        let r = synthesize_grid(&[m], &extent_around(45.0, 1.0, 0.01, 0.01), &SynthOptions::default());
        assert!(matches!(r, Err(Error::DegenerateGeometry { .. })));
    }

    #[test]
    fn interpolation_error_bound() {
        let masses = [
            PointMassSpec { lat: 47.0, lon: 2.0, depth: 2000.0, mass: 8e12 },
            PointMassSpec { lat: 47.02, lon: 2.03, depth: 3000.0, mass: -6e12 },
        ];
        // Spacing 0.0015° ≈ 167 m north, well below a tenth of the depth.
        let opts = SynthOptions::default();
        let ext = GridExtent::covering(46.9, 47.1, 1.9, 2.1, 0.0015, 0.0015);
        let maps = super::super::MapSet::new(vec![synthesize_grid(&masses, &ext, &opts).unwrap()]);
        let peak = 2.0 * GRAVITATIONAL_CONSTANT * 8e12 / 2000f64.powi(3);
        let mut rng_state = 12345u64;
        for _ in 0..500 {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (rng_state >> 11) as f64 / (1u64 << 53) as f64;
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = (rng_state >> 11) as f64 / (1u64 << 53) as f64;
            let (lat, lon) = (46.95 + 0.1 * a, 1.95 + 0.1 * b);
            let exact = direct_gradient(&masses, lat, lon, 0.0, 0.0);
            let interp = maps.query(lat, lon).unwrap() - BACKGROUND_GRADIENT;
            assert!((interp - exact).abs() < 0.02 * peak, "{interp} vs {exact}");
        }
    }

    #[test]
    fn anomaly_mean_vanishes_on_wide_grid() {
        let m = PointMassSpec { lat: 45.0, lon: 0.0, depth: 1000.0, mass: 1e12 };
        // 0.3° square, about 30 times the depth, spacing 0.0005°.
        let ext = GridExtent::covering(44.85, 45.15, -0.2, 0.2, 0.0005, 0.0007);
        let g = synthesize_grid(&[m], &ext, &SynthOptions { background: 0.0, ..Default::default() }).unwrap();
        let peak = g.values.iter().cloned().fold(0.0, f64::max);
        let mean = g.values.iter().sum::<f64>() / g.values.len() as f64;
        assert!(mean.abs() < 0.1 * peak, "mean {mean:e} peak {peak:e}");
    }

    #[test]
    fn cutoff_close_to_exact_sum() {
        let masses: Vec<_> = (0..40)
            .map(|k| PointMassSpec {
                lat: 45.0 + 0.01 * (k % 8) as f64,
                lon: 0.013 * (k / 8) as f64,
                depth: 1500.0,
                mass: if k % 3 == 0 { -4e12 } else { 4e12 },
            })
            .collect();
        let ext = GridExtent::covering(45.0, 45.08, 0.0, 0.06, 0.002, 0.002);
        let exact = synthesize_grid(&masses, &ext, &SynthOptions::default()).unwrap();
        let cut = synthesize_grid(&masses, &ext, &SynthOptions { cutoff_radius: Some(50_000.0), ..Default::default() }).unwrap();
        for (a, b) in exact.values.iter().zip(&cut.values) {
            assert!((a - b).abs() < 1e-20);
        }
    }

    #[test]
    fn mass_list_parsing() {
        let text = "# lat lon depth mass\n45.0 1.0 2000 5e12\n\n46.5, -0.5, 800, -1e12 # trailing\n";
        let v = parse_mass_list(text).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].mass, -1e12);
        assert!(parse_mass_list("45 1 2000").is_err());
        assert!(parse_mass_list("45 1 -5 1e9").is_err());
        assert!(parse_mass_list("45 1 abc 1e9").is_err());
    }
}
