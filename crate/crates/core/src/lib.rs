//! Numerical laboratory for temporal cloaking of the scalar wave equation.
//!
//! A smooth time shift c(x) = c0·χ(x) supported in a ball cuts a void Y₀ out
//! of spacetime. The physical solution u of u_tt = a²Δu is pulled back to
//! the cloaked coordinates as v, and the crate checks that an observer on
//! the boundary of the box cannot tell v from u.
//!
//! * [`profile`]: the bump, the time change and the region labels;
//! * [`symbol`]: hyperbolicity margin, characteristic roots, general metrics;
//! * [`wavesolver`]: leapfrog solver, boundary data, traces, 1D oracle;
//! * [`transformed`]: the mapped field, gluing, residuals, the slab solve;
//! * [`experiment`]: configs, the end-to-end pipeline, convergence fits;
//! * [`io`]: CSV tables, the `TCLK` binary dump, atomic writes.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod io;
pub mod profile;
pub mod symbol;
pub mod transformed;
pub mod wavesolver;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ExperimentReport, PhysicalParams};
pub use profile::{BumpShape, CloakProfile, RegionLabel};
pub use symbol::{FeasibilityReport, SampleGrid};
pub use transformed::{CloakedField, Provenance};
pub use wavesolver::{BoundarySignal, BoundaryTrace, Grid, SpacetimeField, SpatialGrid, TimeAxis};
