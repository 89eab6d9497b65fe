//! Second-order leapfrog for u_tt = a²Δu with Dirichlet data:
//!
//! ```text
//! u[n+1] = 2u[n] - u[n-1] + (a·dt/h)²·Δ_h u[n]      interior nodes
//! u[n+1] = f(t[n+1])                                  boundary nodes
//! ```

use super::field::SpacetimeField;
use super::grid::{Grid, SpatialGrid, TimeAxis};
use super::signal::BoundarySignal;
use crate::error::{Error, Result};
use crate::symbol::max_characteristic_speed;

/// Five-point (three-point in 1D) Laplacian times h² at an interior node.
#[inline]
pub(crate) fn laplacian_h2(space: &SpatialGrid, u: &[f64], idx: usize) -> f64 {
    let mut s = -2.0 * space.dim() as f64 * u[idx];
    for axis in 0..space.dim() {
        let st = space.stride(axis);
        s += u[idx + st] + u[idx - st];
    }
    s
}

/// One interior update into `next`; boundary nodes of `next` are untouched.
pub fn leapfrog_step(space: &SpatialGrid, courant2: f64, prev: &[f64], curr: &[f64], next: &mut [f64]) {
    let n = space.points();
    match space.dim() {
        1 => {
            for i in 1..n - 1 {
                let lap = curr[i + 1] + curr[i - 1] - 2.0 * curr[i];
                next[i] = 2.0 * curr[i] - prev[i] + courant2 * lap;
            }
        }
        _ => {
            for j in 1..n - 1 {
                let row = j * n;
                for i in 1..n - 1 {
                    let k = row + i;
                    let lap = curr[k + 1] + curr[k - 1] + curr[k + n] + curr[k - n] - 4.0 * curr[k];
                    next[k] = 2.0 * curr[k] - prev[k] + courant2 * lap;
                }
            }
        }
    }
}

pub(crate) fn boundary_nodes(space: &SpatialGrid) -> Vec<usize> {
    (0..space.len()).filter(|&k| space.is_boundary(k)).collect()
}

/// Impose Dirichlet data f(t) on the boundary nodes of one level.
pub(crate) fn apply_boundary(space: &SpatialGrid, nodes: &[usize], f: &BoundarySignal, t: f64, level: &mut [f64]) {
    for &k in nodes {
        level[k] = f.value(space, k, t);
    }
}

fn check_window(axis: &TimeAxis, f: &BoundarySignal) -> Result<()> {
    if f.is_silent() {
        return Ok(());
    }
    // the first two levels must be at rest
    let t_first = axis.time(1.min(axis.count - 1));
    let t_last = axis.last();
    if f.t_on < t_first || f.t_off > t_last {
        return Err(Error::SignalOutsideWindow {
            t_on: f.t_on,
            t_off: f.t_off,
            t_first,
            t_last,
        });
    }
    Ok(())
}

/// Solve the physical initial-boundary value problem on the grid's window.
pub fn solve_physical(grid: &Grid, a: f64, f: &BoundarySignal) -> Result<SpacetimeField> {
    grid.check_cfl(a)?;
    f.validate(grid.space.dim())?;
    let axis = grid.time_axis();
    if axis.count < 3 {
        return Err(Error::Config("time window holds fewer than three levels".into()));
    }
    check_window(&axis, f)?;
    let mut u = SpacetimeField::zeros(grid.space.clone(), axis);
    continue_physical(&mut u, 1, a, f);
    Ok(u)
}

/// Recompute levels `from+1..` by leapfrog from levels `from-1` and `from`.
pub fn continue_physical(u: &mut SpacetimeField, from: usize, a: f64, f: &BoundarySignal) {
    let space = u.space().clone();
    let axis = *u.axis();
    let r = a * axis.dt / space.h();
    let courant2 = r * r;
    let nodes = boundary_nodes(&space);
    for m in from..axis.count - 1 {
        let (prev, curr, next) = u.step_levels(m);
        leapfrog_step(&space, courant2, prev, curr, next);
        apply_boundary(&space, &nodes, f, axis.time(m + 1), next);
    }
}

/// Discrete energy between two consecutive levels,
/// ½Σ((u1-u0)/dt)² hⁿ + ½a²Σ_edges (δu1·δu0)/h² hⁿ,
/// conserved exactly by leapfrog under homogeneous Dirichlet data.
pub fn discrete_energy(space: &SpatialGrid, a: f64, dt: f64, u0: &[f64], u1: &[f64]) -> f64 {
    let h = space.h();
    let cell = h.powi(space.dim() as i32);
    let kinetic: f64 = u0
        .iter()
        .zip(u1)
        .map(|(p, q)| {
            let v = (q - p) / dt;
            v * v
        })
        .sum();
    let n = space.points();
    let mut potential = 0.0;
    for k in 0..space.len() {
        let [i, j] = space.axes(k);
        for axis in 0..space.dim() {
            let along = if axis == 0 { i } else { j };
            if along + 1 < n {
                let st = space.stride(axis);
                potential += (u1[k + st] - u1[k]) * (u0[k + st] - u0[k]);
            }
        }
    }
    0.5 * cell * (kinetic + a * a * potential / (h * h))
}

/// Time step serving both the physical and the transformed solves:
/// cfl_limit·h / (a_eff·√n) with a_eff the largest characteristic slope
/// a / (1 - a·max|∇c|) implied by the hyperbolicity margin.
pub fn suggest_dt(space: &SpatialGrid, a: f64, margin_min: f64, cfl_limit: f64) -> Result<f64> {
    if !(margin_min > 0.0) {
        return Err(Error::NotHyperbolic {
            margin: margin_min,
            floor: 0.0,
        });
    }
    let grad_norm = (1.0 - margin_min.min(1.0)).sqrt() / a;
    let a_eff = max_characteristic_speed(a, grad_norm)?;
    Ok(cfl_limit * space.h() / (a_eff * (space.dim() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavesolver::signal::Face;

    fn grid1(points: usize, a: f64) -> Grid {
        let space = SpatialGrid::new(1, 1.0, points).unwrap();
        let dt = 0.9 * space.h() / a;
        Grid::new(space, dt, -0.5, 1.5, 0.9).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let g = grid1(33, 1.0);
        let u = solve_physical(&g, 1.0, &BoundarySignal::silent()).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interior_satisfies_discrete_equation() {
        let g = grid1(41, 1.0);
        let f = BoundarySignal::ricker(-0.3, 0.5, 1.0, vec![Face::Left]);
        let u = solve_physical(&g, 1.0, &f).unwrap();
        let r2 = (g.dt / g.h()).powi(2);
        for m in 1..u.levels() - 1 {
            for i in 1..40 {
                let lhs = u.value(m + 1, i);
                let rhs = 2.0 * u.value(m, i) - u.value(m - 1, i)
                    + r2 * (u.value(m, i + 1) + u.value(m, i - 1) - 2.0 * u.value(m, i));
                assert_eq!(lhs, rhs);
            }
        }
        for m in 0..2 {
            assert!(u.level(m).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn driven_face_reproduces_signal() {
        let g = grid1(33, 1.0);
        let f = BoundarySignal::ricker(-0.3, 0.5, 2.0, vec![Face::Left]);
        let u = solve_physical(&g, 1.0, &f).unwrap();
        for m in 0..u.levels() {
            assert_eq!(u.value(m, 0), f.waveform(u.time(m)));
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let space = SpatialGrid::new(2, 1.0, 33).unwrap();
        let g = Grid::new(space.clone(), space.h(), -0.5, 0.5, 0.9).unwrap();
        assert!(matches!(
            solve_physical(&g, 1.0, &BoundarySignal::silent()),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn signal_before_window_is_rejected() {
        let g = grid1(33, 1.0);
        let f = BoundarySignal::ricker(-0.6, 0.5, 1.0, vec![Face::Left]);
        assert!(matches!(
            solve_physical(&g, 1.0, &f),
            Err(Error::SignalOutsideWindow { .. })
        ));
    }

    #[test]
    fn suggest_dt_examples() {
        let s = SpatialGrid::new(2, 1.0, 33).unwrap();
        let flat = suggest_dt(&s, 1.0, 1.0, 0.9).unwrap();
        assert!((flat - 0.9 * s.h() / 2f64.sqrt()).abs() < 1e-15);
        // |∇c| = 0.5, a = 1: a_eff = 2
        let dt = suggest_dt(&s, 1.0, 0.75, 0.9).unwrap();
        assert!((dt - 0.9 * s.h() / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        let tiny = suggest_dt(&s, 1.0, 1e-10, 0.9).unwrap();
        assert!(tiny < 1e-5 * flat);
        assert!(suggest_dt(&s, 1.0, 0.0, 0.9).is_err());
    }
}
