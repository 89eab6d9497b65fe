use super::grid::{SpatialGrid, TimeAxis};

/// Payload stored in void cells: a quiet NaN with a recognisable mantissa so
/// that any arithmetic on it is visible downstream.
pub const VOID_SENTINEL: f64 = f64::from_bits(0x7FF8_0000_C10A_C000);

pub fn is_void_sentinel(v: f64) -> bool {
    v.to_bits() == VOID_SENTINEL.to_bits()
}

/// Scalar field on a spatial lattice × uniformly spaced time levels, with an
/// optional per-cell void mask. `None` means every cell is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeField {
    space: SpatialGrid,
    axis: TimeAxis,
    values: Vec<f64>,
    void: Option<Vec<bool>>,
}

impl SpacetimeField {
    pub fn zeros(space: SpatialGrid, axis: TimeAxis) -> Self {
        let len = space.len() * axis.count;
        Self {
            space,
            axis,
            values: vec![0.0; len],
            void: None,
        }
    }

    pub fn from_parts(
        space: SpatialGrid,
        axis: TimeAxis,
        values: Vec<f64>,
        void: Option<Vec<bool>>,
    ) -> Self {
        assert_eq!(values.len(), space.len() * axis.count);
        if let Some(m) = &void {
            assert_eq!(m.len(), values.len());
        }
        Self {
            space,
            axis,
            values,
            void,
        }
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn axis(&self) -> &TimeAxis {
        &self.axis
    }

    pub fn levels(&self) -> usize {
        self.axis.count
    }

    pub fn time(&self, m: usize) -> f64 {
        self.axis.time(m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn level(&self, m: usize) -> &[f64] {
        let n = self.space.len();
        &self.values[m * n..(m + 1) * n]
    }

    pub fn level_mut(&mut self, m: usize) -> &mut [f64] {
        let n = self.space.len();
        &mut self.values[m * n..(m + 1) * n]
    }

    pub fn value(&self, m: usize, idx: usize) -> f64 {
        self.values[m * self.space.len() + idx]
    }

    pub fn set(&mut self, m: usize, idx: usize, v: f64) {
        let n = self.space.len();
        self.values[m * n + idx] = v;
    }

    /// Levels m-1 and m read-only, level m+1 writable.
    pub fn step_levels(&mut self, m: usize) -> (&[f64], &[f64], &mut [f64]) {
        let n = self.space.len();
        let (head, tail) = self.values.split_at_mut((m + 1) * n);
        let (prev, curr) = head[(m - 1) * n..].split_at(n);
        (prev, curr, &mut tail[..n])
    }

    pub fn void_mask(&self) -> Option<&[bool]> {
        self.void.as_deref()
    }

    pub fn is_void(&self, m: usize, idx: usize) -> bool {
        self.void
            .as_ref()
            .is_some_and(|v| v[m * self.space.len() + idx])
    }

    pub fn void_count(&self) -> usize {
        self.void
            .as_ref()
            .map_or(0, |v| v.iter().filter(|&&b| b).count())
    }

    pub fn is_fully_defined(&self) -> bool {
        self.void_count() == 0
    }

    /// Largest |value| over defined cells.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.void.as_ref().is_some_and(|v| v[*k]))
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }
}
