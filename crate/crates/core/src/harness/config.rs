use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FilterConfig;
use crate::geodesy::GeodeticPosition;
use crate::gradiometer::GradiometerConfig;
use crate::ins::{AltimeterConfig, SensorErrorBudget};
use crate::trajectory::VibrationConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouteConfig {
    pub start: GeodeticPosition,
    pub end: GeodeticPosition,
    /// m/s
    pub speed: f64,
    /// m
    pub altitude: f64,
}

impl Default for RouteConfig {
    fn default() -> Self {
        Self {
            start: GeodeticPosition { latitude: 53.407579, longitude: -2.967853, altitude: 0.0 },
            end: GeodeticPosition { latitude: 43.604652, longitude: 1.444209, altitude: 0.0 },
            speed: 100.0,
            altitude: 3000.0,
        }
    }
}

/// Parameters of the bundled synthetic map set: a coarse regional grid of
/// deep sources plus fine tiles along the route that also carry shallow
/// sources, with a stretch of the route left to the coarse grid alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticMapConfig {
    pub seed: u64,
    pub reference_altitude: f64,
    pub background: f64,
    /// Coarse grid extent and spacing (degrees).
    pub coarse_lat: [f64; 2],
    pub coarse_lon: [f64; 2],
    pub coarse_spacing: f64,
    /// Deep sources: depth range (m), lattice spacing (m), peak gradient at
    /// the reference altitude (1/s²).
    pub deep_depth: [f64; 2],
    pub deep_spacing: f64,
    pub deep_peak: f64,
    pub deep_cutoff: f64,
    /// Fine tiles: node spacing and tile height (degrees), half-width of the
    /// corridor either side of the route (degrees).
    pub fine_spacing: f64,
    pub tile_height: f64,
    pub corridor_half_width: f64,
    pub shallow_depth: [f64; 2],
    pub shallow_spacing: f64,
    pub shallow_peak: f64,
    pub shallow_cutoff: f64,
    /// Latitude bands left without fine tiles.
    pub gaps: Vec<[f64; 2]>,
}

impl Default for SyntheticMapConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            reference_altitude: 3000.0,
            background: crate::gravmap::BACKGROUND_GRADIENT,
            coarse_lat: [43.0, 54.0],
            coarse_lon: [-4.0, 2.5],
            coarse_spacing: 1.0 / 60.0,
            deep_depth: [5000.0, 9000.0],
            deep_spacing: 10_000.0,
            deep_peak: 1.0e-8,
            deep_cutoff: 40_000.0,
            fine_spacing: 0.0008,
            tile_height: 0.2,
            corridor_half_width: 0.1,
            shallow_depth: [300.0, 1500.0],
            shallow_spacing: 2500.0,
            shallow_peak: 2.5e-8,
            shallow_cutoff: 10_000.0,
            gaps: vec![[49.35, 50.72]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum MapSpec {
    Synthetic(SyntheticMapConfig),
    Files { files: Vec<PathBuf> },
}

impl Default for MapSpec {
    fn default() -> Self {
        MapSpec::Synthetic(SyntheticMapConfig::default())
    }
}

/// Parameters that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Gradiometer phase noise σ_φ (rad).
    PhaseNoise,
    /// Random measurement failure probability.
    FailureProb,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::PhaseNoise => "phase_noise",
            SweepParameter::FailureProb => "failure_prob",
        }
    }

    pub fn apply(&self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParameter::PhaseNoise => config.gradiometer.sigma_phi = value,
            SweepParameter::FailureProb => config.gradiometer.failure_probability = value,
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase_noise" | "sigma_phi" => Ok(SweepParameter::PhaseNoise),
            "failure_prob" | "failure_probability" => Ok(SweepParameter::FailureProb),
            other => Err(Error::Config(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl std::str::FromStr for SweepSpec {
    type Err = Error;

    /// Parses `name=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep `{s}` is not of the form name=v1,v2,...")))?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad sweep value `{v}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepSpec { parameter: name.trim().parse()?, values })
    }
}

/// Everything needed to reproduce a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub runs: usize,
    pub base_seed: u64,
    /// Disables the particle filter.
    pub unaided: bool,
    /// Stops every run after this many seconds.
    pub truncate: Option<f64>,
    /// Samples per ellipse-fit window.
    pub ellipse_window: usize,
    /// Start of the post-convergence averaging segment (s).
    pub settle_time: f64,
    pub route: RouteConfig,
    pub imu: SensorErrorBudget,
    pub gradiometer: GradiometerConfig,
    pub filter: FilterConfig,
    pub altimeter: AltimeterConfig,
    pub vibration: VibrationConfig,
    pub maps: MapSpec,
    #[serde(rename = "sweep")]
    pub sweeps: Vec<SweepSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            runs: 10,
            base_seed: 20_240_601,
            unaided: false,
            truncate: None,
            ellipse_window: 20,
            settle_time: 600.0,
            route: RouteConfig::default(),
            imu: SensorErrorBudget::AVIATION,
            gradiometer: GradiometerConfig::default(),
            filter: FilterConfig::default(),
            altimeter: AltimeterConfig::default(),
            vibration: VibrationConfig::default(),
            maps: MapSpec::default(),
            sweeps: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config; relative map paths resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        if let (MapSpec::Files { files }, Some(dir)) = (&mut config.maps, path.parent()) {
            for f in files.iter_mut() {
                if f.is_relative() {
                    *f = dir.join(&*f);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !self.imu.is_valid() {
            return Err(Error::Config("imu error budget must be finite and non-negative".into()));
        }
        if !(self.route.speed > 0.0) {
            return Err(Error::Config("route.speed must be positive".into()));
        }
        if let Some(t) = self.truncate {
            if !(t >= 1.0) {
                return Err(Error::Config(format!("truncate must be at least 1 s, got {t}")));
            }
        }
        if self.ellipse_window < 6 {
            return Err(Error::Config("ellipse_window must be at least 6".into()));
        }
        self.gradiometer.validate()?;
        self.filter.validate()?;
        if let MapSpec::Files { files } = &self.maps {
            if files.is_empty() {
                return Err(Error::Config("maps.files is empty".into()));
            }
            if let Some(missing) = files.iter().find(|f| !f.exists()) {
                return Err(Error::Config(format!("map file {} does not exist", missing.display())));
            }
        }
        for s in &self.sweeps {
            if s.values.is_empty() {
                return Err(Error::Config(format!("sweep {} has no values", s.parameter.name())));
            }
        }
        Ok(())
    }
}

/// Independent seeds for the random streams of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub imu: u64,
    pub gradiometer: u64,
    pub failure: u64,
    pub filter: u64,
    pub altimeter: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one named stream of one run.
pub fn stream_seed(base: u64, run_index: usize, stream: &str) -> u64 {
    let tag = stream.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x1000_0000_01b3));
    splitmix64(splitmix64(splitmix64(base) ^ run_index as u64) ^ tag)
}

impl RunSeeds {
    pub fn derive(base: u64, run_index: usize) -> Self {
        Self {
            imu: stream_seed(base, run_index, "imu"),
            gradiometer: stream_seed(base, run_index, "gradiometer"),
            failure: stream_seed(base, run_index, "failure"),
            filter: stream_seed(base, run_index, "filter"),
            altimeter: stream_seed(base, run_index, "altimeter"),
        }
    }
}
