use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::Serialize;

use qcx_core::extension::{
    DEFAULT_EXTERIOR_RADIUS, MIN_ANGULAR, MIN_BOUNDARY_SAMPLES, MIN_INJECTIVITY_PAIRS, MIN_RADIAL,
    NONDEGENERACY_SAMPLES,
};
use qcx_core::harmonic::MIN_GRID;
use qcx_core::schwarzian::{PolarGrid, DEFAULT_REFINEMENTS, NORM_RADIUS_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Area,
    Certify,
    Extend,
    Schwarzian,
    Hadamard,
    Harmonic,
    Gallery,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

/// Every numerical knob the CLI exposes, with the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Fallback `k` for inputs that do not carry one.
    pub k: Option<f64>,
    pub area_r: f64,
    pub radial: usize,
    pub angular: usize,
    pub exterior_radius: f64,
    pub pairs: usize,
    pub boundary_samples: usize,
    pub omega_dilation: Option<f64>,
    pub schwarzian_radial: usize,
    pub schwarzian_angular: usize,
    pub refinements: usize,
    pub harmonic_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let polar = PolarGrid::default();
        Tolerances {
            k: None,
            area_r: 1.0,
            radial: MIN_RADIAL,
            angular: MIN_ANGULAR,
            exterior_radius: DEFAULT_EXTERIOR_RADIUS,
            pairs: MIN_INJECTIVITY_PAIRS,
            boundary_samples: NONDEGENERACY_SAMPLES,
            omega_dilation: None,
            schwarzian_radial: polar.radial_count,
            schwarzian_angular: polar.angular_count,
            refinements: DEFAULT_REFINEMENTS,
            harmonic_grid: MIN_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("--tol {key}: {message}")]
pub struct TolError {
    pub key: String,
    pub message: String,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, TolError> {
    value.parse().map_err(|_| TolError {
        key: key.into(),
        message: format!("cannot parse `{value}`"),
    })
}

impl Tolerances {
    pub const KEYS: &'static [&'static str] = &[
        "k",
        "area_r",
        "radial",
        "angular",
        "exterior_radius",
        "pairs",
        "boundary_samples",
        "omega_dilation",
        "schwarzian_radial",
        "schwarzian_angular",
        "refinements",
        "harmonic_grid",
    ];

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), TolError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| TolError {
            key: assignment.into(),
            message: "expected key=value".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "k" => self.k = Some(parse(key, value)?),
            "area_r" => self.area_r = parse(key, value)?,
            "radial" => self.radial = parse(key, value)?,
            "angular" => self.angular = parse(key, value)?,
            "exterior_radius" => self.exterior_radius = parse(key, value)?,
            "pairs" => self.pairs = parse(key, value)?,
            "boundary_samples" => self.boundary_samples = parse(key, value)?,
            "omega_dilation" => self.omega_dilation = Some(parse(key, value)?),
            "schwarzian_radial" => self.schwarzian_radial = parse(key, value)?,
            "schwarzian_angular" => self.schwarzian_angular = parse(key, value)?,
            "refinements" => self.refinements = parse(key, value)?,
            "harmonic_grid" => self.harmonic_grid = parse(key, value)?,
            _ => {
                return Err(TolError {
                    key: key.into(),
                    message: format!("unknown key; expected one of {}", Self::KEYS.join(", ")),
                })
            }
        }
        self.check(key).map_err(|message| TolError {
            key: key.into(),
            message,
        })
    }

    fn check(&self, key: &str) -> Result<(), String> {
        let at_least = |value: usize, min: usize| {
            if value >= min {
                Ok(())
            } else {
                Err(format!("must be at least {min}, got {value}"))
            }
        };
        match key {
            "k" => match self.k {
                Some(k) if !(0.0..1.0).contains(&k) => Err(format!("must lie in [0, 1), got {k}")),
                _ => Ok(()),
            },
            "area_r" if !(self.area_r > 0.0 && self.area_r <= 1.0) => {
                Err(format!("must lie in (0, 1], got {}", self.area_r))
            }
            "radial" => at_least(self.radial, MIN_RADIAL),
            "angular" => at_least(self.angular, MIN_ANGULAR),
            "exterior_radius" if !(self.exterior_radius >= 2.0) => {
                Err(format!("must be at least 2, got {}", self.exterior_radius))
            }
            "pairs" => at_least(self.pairs, MIN_INJECTIVITY_PAIRS),
            "boundary_samples" => at_least(self.boundary_samples, MIN_BOUNDARY_SAMPLES),
            "omega_dilation" => match self.omega_dilation {
                Some(r) if !(r > 0.0 && r < 1.0) => Err(format!("must lie in (0, 1), got {r}")),
                _ => Ok(()),
            },
            "schwarzian_radial" | "schwarzian_angular" => self.polar_grid().map(|_| ()).map_err(|e| e.to_string()),
            "harmonic_grid" => at_least(self.harmonic_grid, MIN_GRID),
            _ => Ok(()),
        }
    }

    pub fn polar_grid(&self) -> qcx_core::Result<PolarGrid> {
        PolarGrid::new(self.schwarzian_radial, self.schwarzian_angular, NORM_RADIUS_CAP)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub tolerances: Tolerances,
}
