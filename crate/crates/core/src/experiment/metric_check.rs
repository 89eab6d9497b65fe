use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::symbol::{
    check_hyperbolic_general, check_timelike_boundary, elliptic_bound_check, margin_at,
    transform_metric, BoundaryNormal, EllipticReport, FeasibilityReport, Metric, MetricSpec,
    SampleGrid, TimelikeReport,
};

/// Tolerance for the general margin to match 1 - a²|∇c|² on the flat metric.
pub const FLAT_AGREEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCheckReport {
    pub preset: String,
    /// min ĝ^{00} over the samples.
    pub hyperbolic: FeasibilityReport,
    /// Flat preset only: max |ĝ^{00} - (1 - a²|∇c|²)| over the samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_margin_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_agreement: Option<bool>,
    /// ĝ = g bit for bit when c0 is set to zero.
    pub identity_exact: bool,
    pub timelike: TimelikeReport,
    pub ellipticity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elliptic_skipped: Option<String>,
    pub admissible: bool,
}

fn boundary_normals(half_width: f64, dim: usize, per_face: usize, times: &[f64]) -> Vec<BoundaryNormal> {
    let along = |i: usize| -half_width + 2.0 * half_width * i as f64 / (per_face - 1) as f64;
    let mut out = Vec::new();
    for &t in times {
        for axis in 0..dim {
            for side in [-1.0, 1.0] {
                let count = if dim == 1 { 1 } else { per_face };
                for i in 0..count {
                    let mut x = vec![0.0; dim];
                    x[axis] = side * half_width;
                    if dim == 2 {
                        x[1 - axis] = along(i);
                    }
                    let mut normal = vec![0.0; dim + 1];
                    normal[axis + 1] = side;
                    out.push(BoundaryNormal { x0: t, x, normal });
                }
            }
        }
    }
    out
}

/// Smallest C0 with Σ g^{jk} ξ_j ξ_k ≤ -C0 |ξ|² over the samples.
fn estimate_ellipticity(metric: &dyn Metric, grid: &SampleGrid) -> f64 {
    let mut c0 = f64::INFINITY;
    for &t in grid.times() {
        for x in grid.points() {
            let g = metric.coefficients(t, x);
            let n = g.nrows() - 1;
            let top = g.view((1, 1), (n, n)).into_owned().symmetric_eigenvalues().max();
            c0 = c0.min(-top);
        }
    }
    c0
}

/// Transformed-coefficient checks for the configured metric preset.
pub fn metric_check(cfg: &ExperimentConfig) -> Result<MetricCheckReport> {
    cfg.validate()?;
    let profile = cfg.profile()?;
    let a = cfg.params()?.speed;
    let dim = cfg.grid.dim;
    let hw = cfg.grid.half_width;
    let metric = cfg.metric.spec.build(dim, a)?;
    let times = vec![cfg.grid.t_min, 0.0, 0.5 * cfg.grid.t_max, cfg.grid.t_max];
    let grid = SampleGrid::default_for(&profile)
        .union(&SampleGrid::lattice(hw, dim, 17))
        .with_times(times.clone());

    let hyperbolic = check_hyperbolic_general(metric.as_ref(), &profile, &grid);

    let (preset, flat) = match &cfg.metric.spec {
        MetricSpec::Minkowski { speed } => {
            let s = speed.unwrap_or(a);
            let mut worst = 0.0f64;
            for &t in grid.times() {
                for x in grid.points() {
                    let gh = transform_metric(metric.as_ref(), &profile, t, x);
                    let flat = if t >= 0.0 { margin_at(&profile, s, x) } else { 1.0 };
                    worst = worst.max((gh[(0, 0)] - flat).abs());
                }
            }
            ("minkowski", Some(worst))
        }
        MetricSpec::Diagonal(_) => ("diagonal", None),
        MetricSpec::Tabulated(_) => ("tabulated", None),
    };

    let flat_profile = profile.with_c0(0.0)?;
    let identity_exact = grid.times().iter().all(|&t| {
        grid.points()
            .iter()
            .all(|x| transform_metric(metric.as_ref(), &flat_profile, t, x) == metric.coefficients(t, x))
    });

    let normals = boundary_normals(hw, dim, 17, &times);
    let timelike = check_timelike_boundary(metric.as_ref(), &profile, &normals);

    let ellipticity = cfg
        .metric
        .ellipticity
        .unwrap_or_else(|| estimate_ellipticity(metric.as_ref(), &grid));
    let (elliptic, elliptic_skipped) = match elliptic_bound_check(metric.as_ref(), ellipticity, &profile, &grid) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let admissible = hyperbolic.admissible && timelike.transformed_timelike;
    Ok(MetricCheckReport {
        preset: preset.to_string(),
        hyperbolic,
        flat_margin_difference: flat,
        flat_agreement: flat.map(|d| d <= FLAT_AGREEMENT_TOL),
        identity_exact,
        timelike,
        ellipticity,
        elliptic,
        elliptic_skipped,
        admissible,
    })
}
