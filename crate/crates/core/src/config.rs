//! Run configuration: JSON in, validated struct out. Validation errors name
//! the offending field path so a bad config is a one-line fix.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelKind;
use crate::oracle::OracleConfig;
use crate::picard::PicardParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub l: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub sigma: f64,
    pub e: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    #[serde(default)]
    pub xi: [f64; 3],
    /// `v` for newton/rotating, `p` for abraham.
    #[serde(default)]
    pub momentum: [f64; 3],
    #[serde(default)]
    pub omega: [f64; 3],
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub inertia: f64,
}

fn one() -> f64 {
    1.0
}

/// Smooth random initial fields, reproducible from the seed; projected onto
/// the constraint manifold unless `admissible` is switched off.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub seed: u64,
    #[serde(default = "default_kmax")]
    pub kmax: i64,
    pub amplitude: f64,
    #[serde(default = "yes")]
    pub admissible: bool,
}

fn default_kmax() -> i64 {
    2
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Checkpoint period; restarts are aligned to multiples of it.
    #[serde(default)]
    pub checkpoint_every: Option<f64>,
    /// Write a per-node diagnostics table next to the manifest.
    #[serde(default = "yes")]
    pub series: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub profile: ProfileConfig,
    pub model: ModelKind,
    #[serde(default = "default_particle")]
    pub particle: ParticleConfig,
    pub fields: FieldConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub picard: PicardParams,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
}

fn default_particle() -> ParticleConfig {
    ParticleConfig { xi: [0.0; 3], momentum: [0.0; 3], omega: [0.0; 3], mass: 1.0, inertia: 1.0 }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| {
            Err(Error::Config { path: path.into(), message })
        };
        if !(self.grid.l > 0.0) {
            return bad("grid.l", format!("{} must be positive", self.grid.l));
        }
        if self.grid.n < 4 || self.grid.n % 2 != 0 {
            return bad("grid.n", format!("{} must be even and at least 4", self.grid.n));
        }
        if !(self.profile.sigma > 0.0) {
            return bad("profile.sigma", format!("{} must be positive", self.profile.sigma));
        }
        if !self.profile.e.is_finite() {
            return bad("profile.e", format!("{} must be finite", self.profile.e));
        }
        if !(self.particle.mass > 0.0) {
            return bad("particle.mass", format!("{} must be positive", self.particle.mass));
        }
        if self.model == ModelKind::Rotating && !(self.particle.inertia > 0.0) {
            return bad(
                "particle.inertia",
                format!("{} must be positive for the rotating model", self.particle.inertia),
            );
        }
        if !(self.fields.amplitude >= 0.0) {
            return bad(
                "fields.amplitude",
                format!("{} must be non-negative", self.fields.amplitude),
            );
        }
        if self.picard.s >= 1.5 {
            return bad("picard.s", format!("{} must be below 3/2", self.picard.s));
        }
        if !(self.picard.eta > 0.0 && self.picard.eta < 1.0) {
            return bad("picard.eta", format!("{} must lie in (0, 1)", self.picard.eta));
        }
        if self.picard.q < 2 {
            return bad("picard.q", format!("{} must be at least 2", self.picard.q));
        }
        if !(self.picard.tol > 0.0) {
            return bad("picard.tol", format!("{} must be positive", self.picard.tol));
        }
        if let Some(c) = self.output.checkpoint_every {
            if !(c > 0.0) {
                return bad("output.checkpoint_every", format!("{c} must be positive"));
            }
        }
        if let Some(o) = &self.oracle {
            o.validate()?;
        }
        Ok(())
    }
}
