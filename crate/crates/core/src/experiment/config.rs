use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::profile::{BumpShape, CloakProfile};
use crate::symbol::{max_admissible_c0_for, MetricSpec};
use crate::wavesolver::{BoundarySignal, Face, FaceProfile, SpatialGrid};

/// Membrane tension T and areal density ρ; the wave speed is a = √(T/ρ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub tension: f64,
    pub density: f64,
    pub speed: f64,
}

impl PhysicalParams {
    pub fn new(tension: f64, density: f64) -> Result<Self> {
        if !(tension > 0.0 && tension.is_finite()) {
            return Err(Error::Config(format!("physics.tension must be > 0, got {tension}")));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::Config(format!("physics.density must be > 0, got {density}")));
        }
        Ok(Self {
            tension,
            density,
            speed: (tension / density).sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub half_width: f64,
    /// Nodes per axis on the coarsest level.
    pub points: usize,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub c0: f64,
    pub c1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub bump: BumpShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub tension: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Number of grids, each halving h and dt.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Top of the direct-solve slab; defaults to 1.5·c0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0_max: Option<f64>,
    #[serde(default = "default_margin_floor")]
    pub margin_floor: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_payload")]
    pub payload_amplitude: f64,
    #[serde(default = "default_snapshots")]
    pub snapshot_rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_levels() -> usize {
    3
}
pub fn default_margin_floor() -> f64 {
    0.05
}
fn default_seed() -> u64 {
    20_240_917
}
fn default_payload() -> f64 {
    1e6
}
fn default_snapshots() -> usize {
    48
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            y0_max: None,
            margin_floor: default_margin_floor(),
            seed: default_seed(),
            payload_amplitude: default_payload(),
            snapshot_rows: default_snapshots(),
            output_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    #[serde(flatten)]
    pub spec: MetricSpec,
    /// Ellipticity constant C0 of the spatial block; estimated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipticity: Option<f64>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            spec: MetricSpec::Minkowski { speed: None },
            ellipticity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub profile: ProfileConfig,
    pub physics: PhysicsConfig,
    pub signal: BoundarySignal,
    #[serde(default)]
    pub experiment: RunConfig,
    #[serde(default)]
    pub metric: MetricConfig,
}

impl ExperimentConfig {
    /// 2D demo: unit box, a = 1, c1 = L/4, septic bump with c0 at 0.8 of the
    /// admissible amplitude, Ricker pulse from the left face.
    pub fn demo_2d() -> Self {
        let c1 = 0.25;
        let bump = BumpShape::Septic;
        let mut signal = BoundarySignal::ricker(-1.3, 0.3, 1.0, vec![Face::Left]);
        signal.face_profile = FaceProfile::SineSquared;
        Self {
            grid: GridConfig {
                dim: 2,
                half_width: 0.5,
                points: 33,
                t_min: -1.4,
                t_max: 0.8,
                cfl: default_cfl(),
            },
            profile: ProfileConfig {
                c0: 0.8 * max_admissible_c0_for(bump, 1.0, c1),
                c1,
                center: None,
                bump,
            },
            physics: PhysicsConfig {
                tension: 1.0,
                density: 1.0,
            },
            signal,
            experiment: RunConfig::default(),
            metric: MetricConfig::default(),
        }
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.physics.tension, self.physics.density)
    }

    pub fn profile(&self) -> Result<CloakProfile> {
        let center = self
            .profile
            .center
            .clone()
            .unwrap_or_else(|| vec![0.0; self.grid.dim]);
        if center.len() != self.grid.dim {
            return Err(Error::Config(format!(
                "profile.center has {} components, grid.dim is {}",
                center.len(),
                self.grid.dim
            )));
        }
        Ok(CloakProfile::new(self.profile.c0, self.profile.c1, center)?.with_bump(self.profile.bump))
    }

    pub fn base_space(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.grid.dim, self.grid.half_width, self.grid.points)
    }

    /// Spatial grids of every refinement level, coarsest first.
    pub fn spaces(&self) -> Result<Vec<SpatialGrid>> {
        let mut out = vec![self.base_space()?];
        for _ in 1..self.experiment.levels {
            let next = out.last().unwrap().refined();
            out.push(next);
        }
        Ok(out)
    }

    pub fn y0_max(&self) -> f64 {
        self.experiment.y0_max.unwrap_or(1.5 * self.profile.c0)
    }

    /// Structural checks that need no solve. The hyperbolicity gate is
    /// separate so that `check` can report an inadmissible amplitude.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(1..=2).contains(&g.dim) {
            return Err(Error::Config(format!("grid.dim must be 1 or 2, got {}", g.dim)));
        }
        let space = self.base_space()?;
        if !(g.t_min < 0.0 && g.t_max > 0.0) {
            return Err(Error::Config(format!(
                "grid time window [{}, {}] must contain 0 in its interior",
                g.t_min, g.t_max
            )));
        }
        if !(g.cfl > 0.0 && g.cfl <= 1.0) {
            return Err(Error::Config(format!("grid.cfl must be in (0, 1], got {}", g.cfl)));
        }
        self.params()?;
        let profile = self.profile()?;
        // trace stencils reach two cells inward
        if !profile.ball_inside_box(g.half_width, 2.0 * space.h()) {
            return Err(Error::Config(format!(
                "cloak ball (radius {}) is not strictly inside the box with two cells to spare",
                profile.c1()
            )));
        }
        self.signal.validate(g.dim)?;
        let e = &self.experiment;
        if e.levels == 0 {
            return Err(Error::Config("experiment.levels must be >= 1".into()));
        }
        if !(e.margin_floor >= 0.0 && e.margin_floor < 1.0) {
            return Err(Error::Config(format!(
                "experiment.margin_floor must be in [0, 1), got {}",
                e.margin_floor
            )));
        }
        let y0_max = self.y0_max();
        if !(y0_max >= profile.c0() && y0_max < g.t_max) {
            return Err(Error::Config(format!(
                "experiment.y0_max = {y0_max} must lie in [c0, t_max)"
            )));
        }
        if !e.payload_amplitude.is_finite() {
            return Err(Error::Config("experiment.payload_amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Parse, apply `section.key=value` overrides, validate.
    pub fn from_json_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let cfg: Self = if overrides.is_empty() {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
            for (key, value) in overrides {
                apply_override(&mut doc, key, value)?;
            }
            serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, overrides).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Parse `key=value`; the value is JSON when it parses, a string otherwise.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{arg}` is not of the form key=value")))?;
    if k.is_empty() || k.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override key `{k}` is malformed")));
    }
    Ok((k.to_string(), v.to_string()))
}

fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("keys are non-empty")
}
