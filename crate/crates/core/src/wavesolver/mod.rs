//! Leapfrog FDTD for the physical wave equation on a box, Dirichlet boundary
//! data, boundary trace extraction and the 1D travelling-wave oracle.

mod field;
mod grid;
mod leapfrog;
mod oracle;
mod signal;
mod trace;

pub use field::{is_void_sentinel, SpacetimeField, VOID_SENTINEL};
pub use grid::{Grid, SpatialGrid, TimeAxis, MIN_POINTS};
pub(crate) use leapfrog::{apply_boundary, boundary_nodes, laplacian_h2};
pub use leapfrog::{continue_physical, discrete_energy, leapfrog_step, solve_physical, suggest_dt};
pub use oracle::dalembert_oracle_1d;
pub use signal::{BoundarySignal, Face, FaceProfile, PulseShape, RICKER_CUTOFF};
pub use trace::{boundary_trace, BoundarySample, BoundaryTrace};
