//! Builds a gradient grid from a handful of buried point masses, writes it
//! to disk in the binary grid format and reads it back.

use gravfix::gravmap::{direct_gradient, BACKGROUND_GRADIENT, load_grid, save_grid, synthesize_grid, GridExtent, MapSet, PointMassSpec, SynthOptions};

fn main() -> gravfix::Result<()> {
    let masses = [
        PointMassSpec { lat: 52.00, lon: -2.00, depth: 1500.0, mass: 4.0e11 },
        PointMassSpec { lat: 52.05, lon: -1.95, depth: 800.0, mass: -6.0e10 },
        PointMassSpec { lat: 51.97, lon: -2.06, depth: 2500.0, mass: 1.5e12 },
    ];
    let extent = GridExtent::covering(51.9, 52.1, -2.1, -1.9, 0.002, 0.002);
    let grid = synthesize_grid(&masses, &extent, &SynthOptions { reference_altitude: 500.0, ..Default::default() })?;
    println!("{} x {} nodes", grid.n_rows, grid.n_cols);

    let (lo, hi) = grid.values.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!("gradient range {lo:.4e} .. {hi:.4e} s^-2");

    let path = std::env::temp_dir().join("gravfix_example.grid");
    save_grid(&grid, &path)?;
    let maps = MapSet::new(vec![load_grid(&path)?]);
    for (lat, lon) in [(52.0, -2.0), (52.05, -1.95), (52.031, -2.017)] {
        let mapped = maps.query(lat, lon)?;
        let exact = direct_gradient(&masses, lat, lon, 500.0, BACKGROUND_GRADIENT);
        println!("({lat}, {lon}): grid {mapped:.5e}  direct {exact:.5e}");
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}
