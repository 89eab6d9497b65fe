//! Reference solutions and small helpers shared by the integration tests.
#![allow(dead_code)]

use tcloak_core::wavesolver::{solve_physical, BoundarySignal, Face, Grid, SpatialGrid};

/// Ricker wavelet (1 - 2ξ²)e^{-ξ²} centred in [t_on, t_off], width span/12.
pub fn ricker(t: f64, t_on: f64, t_off: f64, amplitude: f64) -> f64 {
    if t <= t_on || t >= t_off {
        return 0.0;
    }
    let xi = (t - 0.5 * (t_on + t_off)) * 12.0 / (t_off - t_on);
    amplitude * (1.0 - 2.0 * xi * xi) * (-xi * xi).exp()
}

/// Exact solution on [x_left, x_left + width] with u = g(t) at the left end
/// and u = 0 at the right end, by the method of images:
/// u = Σ_k g(t - (2kW + s)/a) - g(t - (2(k+1)W - s)/a),  s = x - x_left.
pub fn images_1d(a: f64, g: impl Fn(f64) -> f64, x_left: f64, width: f64, x: f64, t: f64, t_on: f64) -> f64 {
    let s = x - x_left;
    let mut u = 0.0;
    let mut k = 0.0;
    loop {
        let direct = t - (2.0 * k * width + s) / a;
        if direct <= t_on {
            break;
        }
        u += g(direct) - g(t - (2.0 * (k + 1.0) * width - s) / a);
        k += 1.0;
    }
    u
}

pub struct OneDimRun {
    pub h: f64,
    pub max_error: f64,
}

pub const ONE_D_AMPLITUDE: f64 = 1.0;

/// Leapfrog on the unit interval [-0.5, 0.5] with a Ricker pulse on the left
/// end, compared with [`images_1d`] at every node of every level.
pub fn one_dim_error(points: usize) -> OneDimRun {
    let a = 1.0;
    let (t_on, t_off) = (-1.0, 1.0);
    let space = SpatialGrid::new(1, 0.5, points).unwrap();
    let dt = 0.9 * space.h() / a;
    let grid = Grid::new(space.clone(), dt, -1.05, 2.0, 0.9).unwrap();
    let f = BoundarySignal::ricker(t_on, t_off, ONE_D_AMPLITUDE, vec![Face::Left]);
    let u = solve_physical(&grid, a, &f).unwrap();
    let g = |t: f64| ricker(t, t_on, t_off, ONE_D_AMPLITUDE);
    let mut max_error = 0.0f64;
    for m in 0..u.levels() {
        let t = u.time(m);
        for (k, &v) in u.level(m).iter().enumerate() {
            let exact = images_1d(a, g, -0.5, 1.0, space.coord(k), t, t_on);
            max_error = max_error.max((v - exact).abs());
        }
    }
    OneDimRun {
        h: space.h(),
        max_error,
    }
}

/// Least-squares slope of log(error) against log(h).
pub fn loglog_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Σ|stencil weights| of the centred transformed operator at a node with
/// gradient `grad` and Laplacian `lap_c` of c: the factor that turns the size
/// of v into the size of the individual residual terms.
pub fn stencil_weight_sum(a: f64, dt: f64, h: f64, dim: usize, grad: &[f64], lap_c: f64) -> f64 {
    let a2 = a * a;
    let lead = 1.0 - a2 * grad.iter().map(|g| g * g).sum::<f64>();
    let mixed: f64 = grad.iter().map(|g| g.abs()).sum();
    4.0 * lead.abs() / (dt * dt) + 2.0 * a2 * mixed / (dt * h) + a2 * lap_c.abs() / dt + 4.0 * dim as f64 * a2 / (h * h)
}
