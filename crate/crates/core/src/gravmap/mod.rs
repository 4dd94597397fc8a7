//! Gridded vertical gravity-gradient maps: prioritized lookup, binary file
//! format and analytic point-mass synthesis.

mod grid;
mod io;
mod synth;

pub use grid::{query_gradient, GravityGradientGrid, MapSet, MAX_GRADIENT};
pub use io::{decode_grid, encode_grid, load_grid, save_grid, HEADER_LEN, MAGIC};
pub use synth::{
    direct_gradient, load_mass_list, parse_mass_list, point_mass_gradient, point_mass_gz, synthesize_grid,
    GridExtent, PointMassSpec, SynthOptions, BACKGROUND_GRADIENT, GRAVITATIONAL_CONSTANT,
};
