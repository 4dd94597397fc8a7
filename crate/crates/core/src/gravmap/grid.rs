use crate::error::{Error, Result};
use crate::geodesy::GeodeticPosition;

/// Sanity bound on stored gradient magnitudes (s⁻²).
pub const MAX_GRADIENT: f64 = 1e-4;

/// Regular latitude/longitude raster of vertical gravity gradient dg_z/dz.
///
/// Row `i` sits at `origin_lat + i * d_lat`, column `j` at
/// `origin_lon + j * d_lon`; `values` is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GravityGradientGrid {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub d_lat: f64,
    pub d_lon: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub reference_altitude: f64,
    pub priority: i32,
    pub values: Vec<f64>,
}

impl GravityGradientGrid {
    /// Builds a grid and checks every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        origin_lat: f64,
        origin_lon: f64,
        d_lat: f64,
        d_lon: f64,
        n_rows: usize,
        n_cols: usize,
        reference_altitude: f64,
        priority: i32,
        values: Vec<f64>,
    ) -> Result<Self> {
        let grid = Self {
            origin_lat,
            origin_lon,
            d_lat,
            d_lon,
            n_rows,
            n_cols,
            reference_altitude,
            priority,
            values,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid filled with one value.
    #[allow(clippy::too_many_arguments)]
    pub fn constant(
        origin_lat: f64,
        origin_lon: f64,
        d_lat: f64,
        d_lon: f64,
        n_rows: usize,
        n_cols: usize,
        value: f64,
        priority: i32,
    ) -> Result<Self> {
        Self::new(
            origin_lat,
            origin_lon,
            d_lat,
            d_lon,
            n_rows,
            n_cols,
            0.0,
            priority,
            vec![value; n_rows.saturating_mul(n_cols)],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows < 2 || self.n_cols < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2x2 nodes, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        if !(self.d_lat > 0.0 && self.d_lon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "cell size must be positive, got d_lat={} d_lon={}",
                self.d_lat, self.d_lon
            )));
        }
        if !(self.origin_lat.is_finite()
            && self.origin_lon.is_finite()
            && self.reference_altitude.is_finite())
        {
            return Err(Error::InvalidGrid("non-finite georeference".into()));
        }
        let top = self.origin_lat + (self.n_rows - 1) as f64 * self.d_lat;
        if self.origin_lat < -90.0 || top > 90.0 + 1e-9 {
            return Err(Error::InvalidGrid(format!(
                "latitude span [{}, {}] leaves [-90, 90]",
                self.origin_lat, top
            )));
        }
        if self.values.len() != self.n_rows * self.n_cols {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                self.n_rows * self.n_cols,
                self.values.len()
            )));
        }
        if let Some((k, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() >= MAX_GRADIENT)
        {
            return Err(Error::InvalidGrid(format!(
                "value {v:e} at index {k} is not finite or exceeds {MAX_GRADIENT:e}"
            )));
        }
        Ok(())
    }

    pub fn lat_max(&self) -> f64 {
        self.origin_lat + (self.n_rows - 1) as f64 * self.d_lat
    }

    pub fn lon_max(&self) -> f64 {
        self.origin_lon + (self.n_cols - 1) as f64 * self.d_lon
    }

    pub fn node_lat(&self, row: usize) -> f64 {
        self.origin_lat + row as f64 * self.d_lat
    }

    pub fn node_lon(&self, col: usize) -> f64 {
        self.origin_lon + col as f64 * self.d_lon
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    fn lon_offset(&self, lon: f64) -> f64 {
        let mut d = lon - self.origin_lon;
        if d < 0.0 {
            d += 360.0;
        }
        d
    }

    /// True if the position falls inside the footprint spanned by the nodes.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        let fi = (lat - self.origin_lat) / self.d_lat;
        let fj = self.lon_offset(lon) / self.d_lon;
        let (mi, mj) = ((self.n_rows - 1) as f64, (self.n_cols - 1) as f64);
        (0.0..=mi).contains(&fi) && (0.0..=mj).contains(&fj)
    }

    /// Bilinear interpolation; `None` outside the footprint.
    pub fn bilinear(&self, lat: f64, lon: f64) -> Option<f64> {
        if !self.contains(lat, lon) {
            return None;
        }
        let fi = (lat - self.origin_lat) / self.d_lat;
        let fj = self.lon_offset(lon) / self.d_lon;
        let i = (fi.floor() as usize).min(self.n_rows - 2);
        let j = (fj.floor() as usize).min(self.n_cols - 2);
        let (ty, tx) = (fi - i as f64, fj - j as f64);
        let row0 = i * self.n_cols + j;
        let row1 = row0 + self.n_cols;
        let v00 = self.values[row0];
        let v01 = self.values[row0 + 1];
        let v10 = self.values[row1];
        let v11 = self.values[row1 + 1];
        let bottom = v00 + tx * (v01 - v00);
        let top = v10 + tx * (v11 - v10);
        Some(bottom + ty * (top - bottom))
    }
}

/// Grids ordered by descending priority. Ties keep insertion order.
#[derive(Clone, Debug, Default)]
pub struct MapSet {
    grids: Vec<GravityGradientGrid>,
}

impl MapSet {
    pub fn new(mut grids: Vec<GravityGradientGrid>) -> Self {
        grids.sort_by_key(|g| std::cmp::Reverse(g.priority));
        Self { grids }
    }

    pub fn push(&mut self, grid: GravityGradientGrid) {
        let at = self.grids.partition_point(|g| g.priority >= grid.priority);
        self.grids.insert(at, grid);
    }

    pub fn grids(&self) -> &[GravityGradientGrid] {
        &self.grids
    }

    pub fn len(&self) -> usize {
        self.grids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grids.is_empty()
    }

    /// Highest-priority grid containing the position.
    pub fn covering_grid(&self, lat: f64, lon: f64) -> Option<&GravityGradientGrid> {
        self.grids.iter().find(|g| g.contains(lat, lon))
    }

    pub fn query(&self, lat: f64, lon: f64) -> Result<f64> {
        self.covering_grid(lat, lon)
            .and_then(|g| g.bilinear(lat, lon))
            .ok_or(Error::OutOfCoverage { lat, lon })
    }
}

/// Gradient at a position from the best grid covering it.
pub fn query_gradient(maps: &MapSet, pos: &GeodeticPosition) -> Result<f64> {
    maps.query(pos.latitude, pos.longitude)
}
