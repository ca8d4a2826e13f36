//! Scenario configuration, read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Rect;
use crate::physics::{FluidModel, WellModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub mesh: MeshConfig,
    pub degree: usize,
    pub physics: PhysicsConfig,
    pub permeability: PermeabilityConfig,
    #[serde(default)]
    pub wells: Option<WellModel>,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub mode: Mode,
}

/// Either `n` for an `n x n` mesh, or both `nx` and `ny`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    pub domain: Rect,
}

impl MeshConfig {
    pub fn square(n: usize, domain: Rect) -> Self {
        Self {
            n: Some(n),
            nx: None,
            ny: None,
            domain,
        }
    }

    pub fn dims(&self) -> Result<(usize, usize)> {
        match (self.n, self.nx, self.ny) {
            (Some(n), None, None) => Ok((n, n)),
            (None, Some(nx), Some(ny)) => Ok((nx, ny)),
            _ => Err(Error::Config("mesh needs either n or both nx and ny".into())),
        }
    }
}

/// Fluid constants; viscosities are normalized to `mu_s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    /// `mu_o / mu_s`.
    pub mobility_ratio: f64,
    pub phi: f64,
    pub d_m: f64,
    pub alpha_t: f64,
    pub alpha_l: f64,
}

impl PhysicsConfig {
    pub fn fluid(&self) -> Result<FluidModel> {
        FluidModel::new(self.mobility_ratio, 1.0, self.phi, self.d_m, self.alpha_t, self.alpha_l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PermeabilityConfig {
    Constant {
        value: f64,
    },
    /// `background` everywhere, `background / factor` on `region`.
    Lens {
        background: f64,
        region: Rect,
        factor: f64,
    },
    /// Raster file with one value per element, multiplied by `scale`.
    Raster {
        path: PathBuf,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// No files are written without a directory.
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Times of diagonal concentration profiles.
    #[serde(default)]
    pub profiles: Vec<f64>,
    #[serde(default = "default_samples")]
    pub profile_samples: usize,
}

fn default_samples() -> usize {
    201
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            snapshots: Vec::new(),
            profiles: Vec::new(),
            profile_samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Wells,
    ManufacturedSolution,
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config file. Relative raster paths are taken relative to the
    /// file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        if let PermeabilityConfig::Raster { path: r, .. } = &mut cfg.permeability {
            if r.is_relative() {
                if let Some(dir) = path.parent() {
                    *r = dir.join(&*r);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.mesh.dims()?;
        if !(1..=16).contains(&self.degree) {
            return bad(format!("degree {} outside 1..=16", self.degree));
        }
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return bad(format!("time step {}", t.dt));
        }
        if !(t.t_end >= t.dt && t.t_end.is_finite()) {
            return bad(format!("final time {} shorter than the step {}", t.t_end, t.dt));
        }
        let o = &self.output;
        if let Some(s) = o.snapshots.iter().chain(&o.profiles).find(|s| !(0.0..=t.t_end).contains(*s)) {
            return bad(format!("output time {s} outside [0, {}]", t.t_end));
        }
        if !o.profiles.is_empty() && o.profile_samples < 2 {
            return bad("profiles need at least 2 samples".into());
        }
        self.physics.fluid()?;
        match self.mode {
            Mode::Wells if self.wells.is_none() => bad("wells mode needs a wells block".into()),
            Mode::ManufacturedSolution if !matches!(self.permeability, PermeabilityConfig::Constant { .. }) => {
                bad("manufactured-solution mode needs constant permeability".into())
            }
            _ => Ok(()),
        }
    }

    /// The homogeneous quarter five-spot on `[0,1000]^2`.
    pub fn five_spot(n: usize, degree: usize, t_end: f64) -> Self {
        Self {
            mesh: MeshConfig::square(n, Rect::square(0.0, 1000.0)),
            degree,
            physics: PhysicsConfig {
                mobility_ratio: 2.0,
                phi: 0.2,
                d_m: 1e-9,
                alpha_t: 1.8e-6,
                alpha_l: 1.8e-5,
            },
            permeability: PermeabilityConfig::Constant { value: 1e-10 },
            wells: Some(WellModel {
                injection: Rect::square(0.0, 100.0),
                production: Rect::square(900.0, 1000.0),
                rate: 0.28,
                c_bar: 1.0,
            }),
            time: TimeConfig { dt: 0.1, t_end },
            output: OutputConfig::default(),
            mode: Mode::Wells,
        }
    }

    /// The five-spot with a low-permeability lens on `[250,500]^2`.
    pub fn lens(n: usize, degree: usize, t_end: f64) -> Self {
        Self {
            permeability: PermeabilityConfig::Lens {
                background: 1e-10,
                region: Rect::square(250.0, 500.0),
                factor: 1000.0,
            },
            ..Self::five_spot(n, degree, t_end)
        }
    }
}
