use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// No grid in the map set contains the queried position.
    #[error("position ({lat:.6}, {lon:.6}) is outside every gravity map")]
    OutOfCoverage { lat: f64, lon: f64 },

    /// A synthetic grid node lies on top of (or within 1 m of) a point mass.
    #[error("grid node within {distance:.3} m of a point mass")]
    DegenerateGeometry { distance: f64 },

    /// Malformed grid file.
    #[error("grid format error at byte {offset}: {reason}")]
    FormatError { offset: usize, reason: String },

    /// Grid metadata or values violate the grid invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate route: {0}")]
    DegenerateRoute(String),

    /// Navigation solution blew up.
    #[error("INS divergence at t = {time:.2} s: speed {speed:.1} m/s exceeds {limit:.1} m/s")]
    Divergence { time: f64, speed: f64, limit: f64 },

    #[error("degenerate ellipse fit: {0}")]
    DegenerateFit(String),

    #[error("conic is not an ellipse (4AC - B^2 = {discriminant:e})")]
    NotAnEllipse { discriminant: f64 },

    /// Every particle likelihood underflowed; weights were reset to uniform.
    #[error("all particle weights underflowed")]
    WeightUnderflow,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("run {run_index}: {source}")]
    Run {
        run_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
