//! Fixtures shared by the criterion benches.

use tcloak_core::experiment::gate;
use tcloak_core::wavesolver::{solve_physical, suggest_dt};
use tcloak_core::{CloakProfile, ExperimentConfig, Grid, SpacetimeField};

/// The 2D demo configuration on a `points`² grid.
pub fn demo(points: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::demo_2d();
    cfg.grid.points = points;
    cfg.experiment.levels = 1;
    cfg
}

/// Grid with the characteristic time step the experiments use.
pub fn demo_grid(cfg: &ExperimentConfig) -> Grid {
    let feas = gate(cfg).expect("demo is admissible");
    let space = cfg.base_space().expect("demo grid");
    let dt = suggest_dt(&space, cfg.params().unwrap().speed, feas.margin_min, cfg.grid.cfl).unwrap();
    Grid::new(space, dt, cfg.grid.t_min, cfg.grid.t_max, cfg.grid.cfl).unwrap()
}

pub fn demo_solution(cfg: &ExperimentConfig) -> (SpacetimeField, CloakProfile) {
    let u = solve_physical(&demo_grid(cfg), cfg.params().unwrap().speed, &cfg.signal).unwrap();
    (u, cfg.profile().unwrap())
}
