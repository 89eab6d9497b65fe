//! The cloaked solution v(y0, y) on (ℝ × D) \ Y₀.
//!
//! Two independent routes to v on Y⁺ are provided:
//!
//! * [`map_solution`] pulls the physical solution through the time change,
//!   v(y0, y) = u(y0 - c(y), y) on Y⁺ and v = u on Y⁻, with cubic Lagrange
//!   interpolation in time that only reads the branch of u on the same side
//!   of x0 = 0;
//! * [`solve_transformed_above`] integrates the transformed equation
//!
//!   ```text
//!   (1 - a²|∇c|²) v₀₀ - 2a² ∇c·∇v₀ - a² (Δc) v₀ - a² Δv = 0
//!   ```
//!
//!   on the flat slab y0 ≥ c0, starting from data sliced out of u.
//!
//! [`residual_transformed`] and [`glue_check`] verify the mapped field.

mod interp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{CloakProfile, RegionLabel};
use crate::symbol::max_characteristic_speed;
use crate::wavesolver::{
    apply_boundary, boundary_nodes, laplacian_h2, BoundarySignal, SpacetimeField, SpatialGrid,
    TimeAxis, VOID_SENTINEL,
};
use interp::{lagrange_derivative_weights, lagrange_weights};

/// Jacobi sweeps allowed per step for the implicit mixed term.
const MAX_MIXED_SWEEPS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Mapped,
    DirectSolve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloakedField {
    pub field: SpacetimeField,
    pub profile: CloakProfile,
    pub provenance: Provenance,
}

impl CloakedField {
    pub fn void_count(&self) -> usize {
        self.field.void_count()
    }
}

fn node_point(space: &SpatialGrid, idx: usize) -> ([f64; 2], usize) {
    (space.coords(idx), space.dim())
}

/// Which levels of u a branch may read.
#[derive(Clone, Copy)]
enum Branch {
    /// levels with t < 0
    Minus,
    /// levels with t ≥ 0
    Plus,
    /// every level (the physical solution as one function)
    Whole,
}

/// u at time `s` and node `idx`, exact when `s` is a level time, otherwise
/// cubic Lagrange interpolation through four levels of the allowed branch.
fn sample_in_time(u: &SpacetimeField, branch: Branch, s: f64, idx: usize) -> Result<f64> {
    let axis = u.axis();
    let zero = axis.zero_level().ok_or_else(|| {
        Error::PreconditionViolated("the physical solution has no level at t = 0".into())
    })?;
    let (lo, hi) = match branch {
        Branch::Minus => (0, zero.saturating_sub(1)),
        Branch::Plus => (zero, axis.count - 1),
        Branch::Whole => (0, axis.count - 1),
    };
    let coverage = || Error::CoverageExceeded {
        time: s,
        first: axis.time(lo),
        last: axis.time(hi),
    };
    if hi < lo + 3 {
        return Err(coverage());
    }
    let p = s / axis.dt - axis.start as f64;
    let nearest = p.round();
    if nearest >= lo as f64 && nearest <= hi as f64 && axis.time(nearest as usize) == s {
        return Ok(u.value(nearest as usize, idx));
    }
    if p < lo as f64 || p > hi as f64 {
        return Err(coverage());
    }
    let first = (p.floor() as usize).saturating_sub(1).clamp(lo, hi - 3);
    let w = lagrange_weights::<4>(first as f64, p);
    Ok((0..4).map(|j| w[j] * u.value(first + j, idx)).sum())
}

/// v on `target` levels; cells in Y₀ are marked void and hold [`VOID_SENTINEL`].
pub fn map_solution_on(u: &SpacetimeField, profile: &CloakProfile, target: TimeAxis) -> Result<SpacetimeField> {
    let space = u.space().clone();
    let n = space.len();
    let c: Vec<f64> = (0..n)
        .map(|k| {
            let (x, d) = node_point(&space, k);
            profile.c_value(&x[..d])
        })
        .collect();
    let mut values = vec![0.0; n * target.count];
    let mut void = vec![false; n * target.count];
    let own_axis = target == *u.axis();
    for m in 0..target.count {
        let y0 = target.time(m);
        for k in 0..n {
            let cell = m * n + k;
            let label = if y0 < 0.0 {
                RegionLabel::YMinus
            } else if y0 < c[k] {
                RegionLabel::YZero
            } else {
                RegionLabel::YPlus
            };
            values[cell] = match label {
                RegionLabel::YZero => {
                    void[cell] = true;
                    VOID_SENTINEL
                }
                _ if own_axis && c[k] == 0.0 => u.value(m, k),
                RegionLabel::YMinus => sample_in_time(u, Branch::Minus, y0, k)?,
                RegionLabel::YPlus => sample_in_time(u, Branch::Plus, y0 - c[k], k)?,
            };
        }
    }
    let void = void.iter().any(|&b| b).then_some(void);
    Ok(SpacetimeField::from_parts(space, target, values, void))
}

/// The cloaked field on the physical solution's own time levels.
pub fn map_solution(u: &SpacetimeField, profile: &CloakProfile) -> Result<CloakedField> {
    Ok(CloakedField {
        field: map_solution_on(u, profile, *u.axis())?,
        profile: profile.clone(),
        provenance: Provenance::Mapped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueReport {
    /// max over y of |lim v from Y⁻ - lim v from Y⁺| at the interface
    pub value_jump: f64,
    /// same for ∂v/∂y0
    pub deriv_jump: f64,
    pub nodes: usize,
}

/// Compare one-sided limits of v and ∂v/∂y0 across the cut: from Y⁻ toward
/// y0 = 0 and from Y⁺ toward y0 = c(y), both expressed at x0 = 0 through the
/// map. Each limit is a quadratic extrapolation through three levels.
pub fn glue_check(v: &CloakedField) -> Result<GlueReport> {
    if v.provenance != Provenance::Mapped {
        return Err(Error::PreconditionViolated("glue_check expects a mapped field".into()));
    }
    let f = &v.field;
    let axis = f.axis();
    let zero = axis.zero_level().ok_or_else(|| {
        Error::PreconditionViolated("the cloaked field has no level at y0 = 0".into())
    })?;
    if zero < 3 {
        return Err(Error::CoverageExceeded {
            time: axis.time(0),
            first: -3.0 * axis.dt,
            last: 0.0,
        });
    }
    let space = f.space();
    let dt = axis.dt;
    let (mut value_jump, mut deriv_jump) = (0.0f64, 0.0f64);
    // nodes at -1, -2, -3 in level units, evaluated at 0
    let wm = lagrange_weights::<3>(-3.0, 0.0);
    let dwm = lagrange_derivative_weights::<3>(-3.0, 0.0);
    for k in 0..space.len() {
        let below = [f.value(zero - 3, k), f.value(zero - 2, k), f.value(zero - 1, k)];
        let v_minus: f64 = (0..3).map(|j| wm[j] * below[j]).sum();
        let d_minus: f64 = (0..3).map(|j| dwm[j] * below[j]).sum::<f64>() / dt;

        let (x, d) = node_point(space, k);
        let ck = v.profile.c_value(&x[..d]);
        let first = (zero..axis.count)
            .find(|&m| !f.is_void(m, k) && axis.time(m) >= ck)
            .filter(|&m| m + 2 < axis.count)
            .ok_or(Error::CoverageExceeded {
                time: ck,
                first: axis.first(),
                last: axis.last(),
            })?;
        // first Y⁺ level sits at s0 = y0 - c(y) ∈ [0, dt) in level units
        let s0 = (axis.time(first) - ck) / dt;
        let above = [f.value(first, k), f.value(first + 1, k), f.value(first + 2, k)];
        let wp = lagrange_weights::<3>(s0, 0.0);
        let dwp = lagrange_derivative_weights::<3>(s0, 0.0);
        let v_plus: f64 = (0..3).map(|j| wp[j] * above[j]).sum();
        let d_plus: f64 = (0..3).map(|j| dwp[j] * above[j]).sum::<f64>() / dt;

        value_jump = value_jump.max((v_plus - v_minus).abs());
        deriv_jump = deriv_jump.max((d_plus - d_minus).abs());
    }
    Ok(GlueReport {
        value_jump,
        deriv_jump,
        nodes: space.len(),
    })
}

fn stencil_is_plus(f: &SpacetimeField, profile: &CloakProfile, level: usize, idx: usize) -> bool {
    let space = f.space();
    let mut nodes = vec![idx];
    for axis in 0..space.dim() {
        let st = space.stride(axis);
        nodes.push(idx + st);
        nodes.push(idx - st);
    }
    (level - 1..=level + 1).all(|m| {
        let y0 = f.time(m);
        nodes.iter().all(|&k| {
            let (x, d) = node_point(space, k);
            !f.is_void(m, k) && profile.classify(y0, &x[..d]) == RegionLabel::YPlus
        })
    })
}

/// Centred second-order residual of the transformed equation at one cell.
pub fn residual_transformed(
    v: &CloakedField,
    a: f64,
    profile: &CloakProfile,
    level: usize,
    idx: usize,
) -> Result<f64> {
    let f = &v.field;
    let space = f.space();
    if level == 0 || level + 1 >= f.levels() || !space.is_deep_interior(idx, 2) {
        return Err(Error::StencilTouchesBoundary);
    }
    if !stencil_is_plus(f, profile, level, idx) {
        return Err(Error::StencilTouchesVoid);
    }
    let (x, d) = node_point(space, idx);
    let x = &x[..d];
    let cg = profile.c_grad(x);
    let mut grad = [0.0; 2];
    grad[..d].copy_from_slice(&cg);
    let lead = 1.0 - a * a * cg.iter().map(|g| g * g).sum::<f64>();
    Ok(residual_at(f, a, lead, &grad, profile.c_laplacian(x), level, idx))
}

fn residual_at(f: &SpacetimeField, a: f64, lead: f64, grad: &[f64; 2], lap_c: f64, level: usize, idx: usize) -> f64 {
    let space = f.space();
    let dt = f.axis().dt;
    let h = space.h();
    let a2 = a * a;
    let (prev, curr, next) = (f.level(level - 1), f.level(level), f.level(level + 1));
    let v00 = (next[idx] - 2.0 * curr[idx] + prev[idx]) / (dt * dt);
    let v0 = (next[idx] - prev[idx]) / (2.0 * dt);
    let mut mixed = 0.0;
    for axis in 0..space.dim() {
        let st = space.stride(axis);
        let v0j = (next[idx + st] - next[idx - st] - prev[idx + st] + prev[idx - st]) / (4.0 * dt * h);
        mixed += grad[axis] * v0j;
    }
    let lap = laplacian_h2(space, curr, idx) / (h * h);
    lead * v00 - 2.0 * a2 * mixed - a2 * lap_c * v0 - a2 * lap
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub argmax_level: usize,
    pub argmax_node: usize,
    pub evaluated: usize,
}

/// Max |residual| over every admissible cell of the field. Same cells and
/// arithmetic as [`residual_transformed`], with the geometry hoisted.
pub fn residual_sweep(v: &CloakedField, a: f64) -> ResidualReport {
    let f = &v.field;
    let space = f.space();
    let coef = Coefficients::new(space, &v.profile, a);
    // largest c over each node's spatial stencil
    let c_stencil: Vec<f64> = (0..space.len())
        .map(|k| {
            if !space.is_deep_interior(k, 2) {
                return f64::INFINITY;
            }
            let mut m = coef.c[k];
            for axis in 0..space.dim() {
                let st = space.stride(axis);
                m = m.max(coef.c[k + st]).max(coef.c[k - st]);
            }
            m
        })
        .collect();
    let mut report = ResidualReport {
        max: 0.0,
        argmax_level: 0,
        argmax_node: 0,
        evaluated: 0,
    };
    for m in 1..f.levels().saturating_sub(1) {
        // times increase with the level, so the oldest level decides
        let t = f.time(m - 1);
        if t < 0.0 {
            continue;
        }
        for k in 0..space.len() {
            if !(t >= c_stencil[k]) {
                continue;
            }
            let r = residual_at(f, a, coef.lead[k], &coef.grad[k], coef.lap_c[k], m, k);
            report.evaluated += 1;
            if r.abs() > report.max || r.is_nan() {
                report.max = r.abs();
                report.argmax_level = m;
                report.argmax_node = k;
            }
        }
    }
    report
}

/// Cauchy data of v on the slab bottom y0 = c0.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSlice {
    pub y0: f64,
    pub value: Vec<f64>,
    pub rate: Vec<f64>,
}

/// v(c0, y) = u(c0 - c(y), y) and ∂v/∂y0 = ∂u/∂x0 at the same point, the
/// latter from centred differences of u interpolated cubically in time.
pub fn slice_initial_data(u: &SpacetimeField, profile: &CloakProfile) -> Result<InitialSlice> {
    let space = u.space();
    let axis = *u.axis();
    let c0 = profile.c0();
    let centred = |m: usize, k: usize| (u.value(m + 1, k) - u.value(m - 1, k)) / (2.0 * axis.dt);
    let mut value = Vec::with_capacity(space.len());
    let mut rate = Vec::with_capacity(space.len());
    for k in 0..space.len() {
        let (x, d) = node_point(space, k);
        let s = c0 - profile.c_value(&x[..d]);
        value.push(sample_in_time(u, Branch::Whole, s, k)?);
        // centred differences exist on levels 1..count-2
        let p = s / axis.dt - axis.start as f64;
        let nearest = p.round();
        let (lo, hi) = (1usize, axis.count.saturating_sub(2));
        let coverage = Error::CoverageExceeded {
            time: s,
            first: axis.time(lo),
            last: axis.time(hi),
        };
        if hi < lo + 3 {
            return Err(coverage);
        }
        if nearest >= lo as f64 && nearest <= hi as f64 && axis.time(nearest as usize) == s {
            rate.push(centred(nearest as usize, k));
            continue;
        }
        if p < lo as f64 || p > hi as f64 {
            return Err(coverage);
        }
        let first = (p.floor() as usize).saturating_sub(1).clamp(lo, hi - 3);
        let w = lagrange_weights::<4>(first as f64, p);
        rate.push((0..4).map(|j| w[j] * centred(first + j, k)).sum());
    }
    Ok(InitialSlice { y0: c0, value, rate })
}

/// Per-node coefficients of the transformed operator.
struct Coefficients {
    c: Vec<f64>,
    /// 1 - a²|∇c|²
    lead: Vec<f64>,
    grad: Vec<[f64; 2]>,
    lap_c: Vec<f64>,
}

impl Coefficients {
    fn new(space: &SpatialGrid, profile: &CloakProfile, a: f64) -> Self {
        let n = space.len();
        let mut lead = Vec::with_capacity(n);
        let mut grad = Vec::with_capacity(n);
        let mut lap_c = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            let (x, d) = node_point(space, k);
            c.push(profile.c_value(&x[..d]));
            let g = profile.c_grad(&x[..d]);
            let mut gg = [0.0; 2];
            gg[..d].copy_from_slice(&g);
            lead.push(1.0 - a * a * g.iter().map(|v| v * v).sum::<f64>());
            grad.push(gg);
            lap_c.push(profile.c_laplacian(&x[..d]));
        }
        Self { c, lead, grad, lap_c }
    }

    fn coupled(&self, k: usize) -> bool {
        self.grad[k] != [0.0, 0.0]
    }
}

/// Σ_j c_j·(w[k+s_j] - w[k-s_j]) / 2h
fn grad_dot(space: &SpatialGrid, g: &[f64; 2], w: &[f64], k: usize) -> f64 {
    let h = space.h();
    (0..space.dim())
        .map(|axis| {
            let st = space.stride(axis);
            g[axis] * (w[k + st] - w[k - st]) / (2.0 * h)
        })
        .sum()
}

/// Settings of the direct slab solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabSettings {
    pub dt: f64,
    pub y0_max: f64,
    pub cfl_limit: f64,
}

/// Integrate the transformed equation on y0 ∈ [c0, y0_max] from `initial`.
///
/// Time differences are centred on every term. The mixed and first-order
/// terms then involve the new level, which couples neighbouring nodes only
/// where ∇c ≠ 0; that small diagonally dominant system is solved by Jacobi
/// sweeps. The first step is the Taylor expansion v + dt·v₀ + dt²/2·v₀₀
/// with v₀₀ taken from the equation.
pub fn solve_transformed_above(
    initial: &InitialSlice,
    f: &BoundarySignal,
    a: f64,
    profile: &CloakProfile,
    space: &SpatialGrid,
    settings: SlabSettings,
) -> Result<CloakedField> {
    let SlabSettings { dt, y0_max, cfl_limit } = settings;
    let n = space.len();
    if initial.value.len() != n || initial.rate.len() != n {
        return Err(Error::PreconditionViolated("slice does not match the grid".into()));
    }
    let coef = Coefficients::new(space, profile, a);
    let lead_min = coef.lead.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lead_min > 0.0) {
        return Err(Error::NotHyperbolic {
            margin: lead_min,
            floor: 0.0,
        });
    }
    let grad_max = coef
        .grad
        .iter()
        .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
        .fold(0.0, f64::max);
    let a_eff = max_characteristic_speed(a, grad_max)?;
    let courant = a_eff * dt * (space.dim() as f64).sqrt() / space.h();
    if courant > cfl_limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation {
            courant,
            limit: cfl_limit,
        });
    }
    let steps = (((y0_max - initial.y0) / dt) + 1e-9).floor().max(2.0) as usize;
    let axis = TimeAxis {
        start: 0,
        count: steps + 1,
        dt,
        shift: initial.y0,
    };
    let mut v = SpacetimeField::zeros(space.clone(), axis);
    let nodes = boundary_nodes(space);
    let h2 = space.h() * space.h();
    let a2 = a * a;

    v.level_mut(0).copy_from_slice(&initial.value);
    let first = {
        let v0 = v.level(0);
        let mut out = vec![0.0; n];
        for k in 0..n {
            if space.is_boundary(k) {
                continue;
            }
            let vt = initial.rate[k];
            let vtt = (2.0 * a2 * grad_dot(space, &coef.grad[k], &initial.rate, k)
                + a2 * coef.lap_c[k] * vt
                + a2 * laplacian_h2(space, v0, k) / h2)
                / coef.lead[k];
            out[k] = v0[k] + dt * vt + 0.5 * dt * dt * vtt;
        }
        out
    };
    v.level_mut(1).copy_from_slice(&first);
    apply_boundary(space, &nodes, f, axis.time(1), v.level_mut(1));

    let coupled: Vec<usize> = (0..n)
        .filter(|&k| !space.is_boundary(k) && coef.coupled(k))
        .collect();
    let diag: Vec<f64> = (0..n)
        .map(|k| coef.lead[k] / (dt * dt) - a2 * coef.lap_c[k] / (2.0 * dt))
        .collect();
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for m in 1..steps {
        let (prev, curr, next) = v.step_levels(m);
        for k in 0..n {
            if space.is_boundary(k) {
                continue;
            }
            let mut r = coef.lead[k] * (2.0 * curr[k] - prev[k]) / (dt * dt)
                - a2 * coef.lap_c[k] * prev[k] / (2.0 * dt)
                + a2 * laplacian_h2(space, curr, k) / h2;
            if coef.coupled(k) {
                r -= a2 / dt * grad_dot(space, &coef.grad[k], prev, k);
            }
            rhs[k] = r;
            next[k] = r / diag[k];
        }
        apply_boundary(space, &nodes, f, axis.time(m + 1), next);
        if coupled.is_empty() {
            continue;
        }
        let mut converged = false;
        for _ in 0..MAX_MIXED_SWEEPS {
            let mut change = 0.0f64;
            let mut scale = 0.0f64;
            for &k in &coupled {
                let updated = (rhs[k] + a2 / dt * grad_dot(space, &coef.grad[k], next, k)) / diag[k];
                change = change.max((updated - next[k]).abs());
                scale = scale.max(updated.abs());
                scratch[k] = updated;
            }
            for &k in &coupled {
                next[k] = scratch[k];
            }
            if change <= 1e-15 * scale || change == 0.0 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence(format!(
                "mixed-term sweeps at y0 = {}",
                axis.time(m + 1)
            )));
        }
    }
    Ok(CloakedField {
        field: v,
        profile: profile.clone(),
        provenance: Provenance::DirectSolve,
    })
}

/// Max |direct - mapped| over the direct solve's slab, mapping `u` onto
/// exactly the direct solve's levels.
pub fn cross_agreement(direct: &CloakedField, u: &SpacetimeField) -> Result<f64> {
    let mapped = map_solution_on(u, &direct.profile, *direct.field.axis())?;
    Ok(direct
        .field
        .values()
        .iter()
        .zip(mapped.values())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max))
}
