use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

/// Uniform node-centred lattice on the box [-half_width, half_width]ⁿ.
/// Node (i, j) sits at (-L + i·h, -L + j·h); flat index is i + j·points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl SpatialGrid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!("grid.dim must be 1 or 2, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!("grid.half_width must be > 0, got {half_width}")));
        }
        if points < MIN_POINTS {
            return Err(Error::Config(format!(
                "grid.points must be >= {MIN_POINTS}, got {points}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    /// Per-axis indices of a flat node index (second slot 0 in 1D).
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.points, idx / self.points]
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * self.points
    }

    /// Coordinates of a node; only the first `dim` entries are meaningful.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.axes(idx);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    /// Flat-index offset of one step along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.points
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let last = self.points - 1;
        let [i, j] = self.axes(idx);
        i == 0 || i == last || (self.dim == 2 && (j == 0 || j == last))
    }

    /// True when every axis index is at least `depth` away from the faces.
    pub fn is_deep_interior(&self, idx: usize, depth: usize) -> bool {
        let hi = self.points - 1 - depth;
        let [i, j] = self.axes(idx);
        (depth..=hi).contains(&i) && (self.dim == 1 || (depth..=hi).contains(&j))
    }

    /// The same box with `2·(points-1)+1` nodes per axis.
    pub fn refined(&self) -> Self {
        Self {
            points: 2 * (self.points - 1) + 1,
            ..self.clone()
        }
    }
}

/// Uniformly spaced time levels `shift + (start + m)·dt`, m = 0..count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub start: i64,
    pub count: usize,
    pub dt: f64,
    pub shift: f64,
}

impl TimeAxis {
    pub fn time(&self, m: usize) -> f64 {
        self.shift + (self.start + m as i64) as f64 * self.dt
    }

    pub fn first(&self) -> f64 {
        self.time(0)
    }

    pub fn last(&self) -> f64 {
        self.time(self.count - 1)
    }

    /// Level sitting exactly at t = 0, if any.
    pub fn zero_level(&self) -> Option<usize> {
        (self.shift == 0.0 && self.start <= 0 && (-self.start) < self.count as i64)
            .then_some((-self.start) as usize)
    }
}

/// Spatial lattice plus the time discretisation of the simulation window.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub space: SpatialGrid,
    pub dt: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub cfl_limit: f64,
}

impl Grid {
    pub fn new(space: SpatialGrid, dt: f64, t_min: f64, t_max: f64, cfl_limit: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {dt}")));
        }
        if !(t_min < 0.0 && t_max > 0.0) {
            return Err(Error::Config(format!(
                "time window must straddle zero, got [{t_min}, {t_max}]"
            )));
        }
        if !(cfl_limit > 0.0 && cfl_limit <= 1.0) {
            return Err(Error::Config(format!("cfl_limit must be in (0, 1], got {cfl_limit}")));
        }
        Ok(Self {
            space,
            dt,
            t_min,
            t_max,
            cfl_limit,
        })
    }

    pub fn h(&self) -> f64 {
        self.space.h()
    }

    /// Levels at k·dt anchored so that t = 0 is a level; the first level is
    /// the largest multiple of dt not after `t_min` is reached from below.
    pub fn time_axis(&self) -> TimeAxis {
        let below = (-self.t_min / self.dt - 1e-9).ceil() as i64;
        let above = (self.t_max / self.dt + 1e-9).floor() as i64;
        TimeAxis {
            start: -below,
            count: (below + above + 1) as usize,
            dt: self.dt,
            shift: 0.0,
        }
    }

    /// a·dt·√n / h
    pub fn courant(&self, a: f64) -> f64 {
        a * self.dt * (self.space.dim() as f64).sqrt() / self.h()
    }

    pub fn check_cfl(&self, a: f64) -> Result<()> {
        let courant = self.courant(a);
        if courant > self.cfl_limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                courant,
                limit: self.cfl_limit,
            });
        }
        Ok(())
    }
}
