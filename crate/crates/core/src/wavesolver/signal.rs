use serde::{Deserialize, Serialize};

use super::grid::SpatialGrid;
use crate::error::{Error, Result};

/// Ricker support half-width in units of its width parameter; the truncated
/// tail is below 2e-14 of the peak.
pub const RICKER_CUTOFF: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    /// (1 - 2ξ²)·exp(-ξ²) centred in the window, truncated at |ξ| = 6.
    Ricker,
    /// sin(2π·cycles·s)·½(1 - cos 2πs) with s the fraction of the window.
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    /// x = -L
    Left,
    /// x = +L
    Right,
    /// y = -L (2D only)
    Bottom,
    /// y = +L (2D only)
    Top,
}

impl Face {
    pub fn all(dim: usize) -> &'static [Face] {
        if dim == 1 {
            &[Face::Left, Face::Right]
        } else {
            &[Face::Left, Face::Right, Face::Bottom, Face::Top]
        }
    }

    pub fn axis(self) -> usize {
        match self {
            Face::Left | Face::Right => 0,
            Face::Bottom | Face::Top => 1,
        }
    }

    pub fn is_low(self) -> bool {
        matches!(self, Face::Left | Face::Bottom)
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::Left => "left",
            Face::Right => "right",
            Face::Bottom => "bottom",
            Face::Top => "top",
        }
    }

    /// Flat node indices on this face, ordered along the tangential axis.
    pub fn nodes(self, space: &SpatialGrid) -> Vec<usize> {
        let last = space.points() - 1;
        let fixed = if self.is_low() { 0 } else { last };
        if space.dim() == 1 {
            return vec![fixed];
        }
        (0..=last)
            .map(|k| match self.axis() {
                0 => space.index(fixed, k),
                _ => space.index(k, fixed),
            })
            .collect()
    }

    /// Whether a node lies on this face.
    pub fn contains(self, space: &SpatialGrid, idx: usize) -> bool {
        let axis = self.axis();
        if axis >= space.dim() {
            return false;
        }
        let i = space.axes(idx)[axis];
        if self.is_low() {
            i == 0
        } else {
            i == space.points() - 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FaceProfile {
    #[default]
    Uniform,
    /// sin²(π·s) in the tangential fraction s ∈ [0, 1]; vanishes at corners.
    SineSquared,
}

/// Compactly supported Dirichlet data f on ℝ × ∂D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySignal {
    pub shape: PulseShape,
    pub t_on: f64,
    pub t_off: f64,
    pub amplitude: f64,
    pub faces: Vec<Face>,
    #[serde(default)]
    pub face_profile: FaceProfile,
    #[serde(default = "default_cycles")]
    pub cycles: f64,
}

fn default_cycles() -> f64 {
    2.0
}

impl BoundarySignal {
    pub fn ricker(t_on: f64, t_off: f64, amplitude: f64, faces: Vec<Face>) -> Self {
        Self {
            shape: PulseShape::Ricker,
            t_on,
            t_off,
            amplitude,
            faces,
            face_profile: FaceProfile::Uniform,
            cycles: default_cycles(),
        }
    }

    /// Zero data on every face.
    pub fn silent() -> Self {
        Self::ricker(0.0, 1.0, 0.0, Vec::new())
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.t_on.is_finite() && self.t_off.is_finite() && self.t_on < self.t_off) {
            return Err(Error::Config(format!(
                "signal window must satisfy t_on < t_off, got [{}, {}]",
                self.t_on, self.t_off
            )));
        }
        if let Some(f) = self.faces.iter().find(|f| f.axis() >= dim) {
            return Err(Error::Config(format!("face `{}` does not exist in {dim}D", f.name())));
        }
        if !self.amplitude.is_finite() || !(self.cycles.is_finite() && self.cycles > 0.0) {
            return Err(Error::Config("signal amplitude and cycles must be finite".into()));
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.amplitude == 0.0 || self.faces.is_empty()
    }

    /// Temporal waveform, identically zero outside [t_on, t_off].
    pub fn waveform(&self, t: f64) -> f64 {
        if t <= self.t_on || t >= self.t_off || self.amplitude == 0.0 {
            return 0.0;
        }
        let span = self.t_off - self.t_on;
        let w = match self.shape {
            PulseShape::Ricker => {
                let width = span / (2.0 * RICKER_CUTOFF);
                let xi = (t - 0.5 * (self.t_on + self.t_off)) / width;
                let xi2 = xi * xi;
                (1.0 - 2.0 * xi2) * (-xi2).exp()
            }
            PulseShape::RaisedCosine => {
                use std::f64::consts::PI;
                let s = (t - self.t_on) / span;
                (2.0 * PI * self.cycles * s).sin() * 0.5 * (1.0 - (2.0 * PI * s).cos())
            }
        };
        self.amplitude * w
    }

    /// f(t) at a boundary node; the first active face containing the node wins.
    pub fn value(&self, space: &SpatialGrid, idx: usize, t: f64) -> f64 {
        let Some(face) = self.faces.iter().find(|f| f.contains(space, idx)) else {
            return 0.0;
        };
        let w = self.waveform(t);
        if w == 0.0 {
            return 0.0;
        }
        let along = match (space.dim(), self.face_profile) {
            (1, _) | (_, FaceProfile::Uniform) => 1.0,
            (_, FaceProfile::SineSquared) => {
                let tangential = 1 - face.axis();
                let k = space.axes(idx)[tangential];
                if k == 0 || k == space.points() - 1 {
                    return 0.0;
                }
                let s = k as f64 / (space.points() - 1) as f64;
                let v = (std::f64::consts::PI * s).sin();
                v * v
            }
        };
        w * along
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ricker_peak_and_support() {
        let s = BoundarySignal::ricker(1.0, 3.0, 2.5, vec![Face::Left]);
        assert!((s.waveform(2.0) - 2.5).abs() < 1e-15);
        assert_eq!(s.waveform(0.99), 0.0);
        assert_eq!(s.waveform(3.0), 0.0);
        assert!(s.waveform(1.0 + 1e-9).abs() < 2e-14 * 2.5);
    }

    #[test]
    fn raised_cosine_vanishes_smoothly() {
        let s = BoundarySignal {
            shape: PulseShape::RaisedCosine,
            ..BoundarySignal::ricker(0.0, 1.0, 1.0, vec![Face::Left])
        };
        assert!(s.waveform(1e-3).abs() < 1e-6);
        assert!(s.waveform(0.3).abs() > 0.1);
    }

    #[test]
    fn face_profile_vanishes_at_corners() {
        let g = SpatialGrid::new(2, 1.0, 17).unwrap();
        let s = BoundarySignal {
            face_profile: FaceProfile::SineSquared,
            ..BoundarySignal::ricker(0.0, 1.0, 1.0, vec![Face::Left])
        };
        assert_eq!(s.value(&g, g.index(0, 0), 0.5), 0.0);
        assert!((s.value(&g, g.index(0, 8), 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(s.value(&g, g.index(16, 8), 0.5), 0.0);
    }

    #[test]
    fn faces_must_exist() {
        let s = BoundarySignal::ricker(0.0, 1.0, 1.0, vec![Face::Top]);
        assert!(s.validate(1).is_err());
        assert!(s.validate(2).is_ok());
    }
}
