//! General second-order hyperbolic operators given by inverse-metric
//! coefficients g^{jk}(x0, x), indices 0..=n with 0 the time slot, and their
//! behaviour under the time change y0 = φ0(x0, x), y = x:
//!
//! ```text
//! ĝ^{jk} = g^{jk}                           1 ≤ j,k ≤ n
//! ĝ^{0j} = Σ_p g^{pj} ∂_p φ0
//! ĝ^{00} = Σ_{p,r} g^{pr} ∂_p φ0 ∂_r φ0
//! ```
//!
//! The transformed operator is hyperbolic in y0 while ĝ^{00} > 0.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{FeasibilityReport, SampleGrid};
use crate::error::{Error, Result};
use crate::profile::CloakProfile;

/// Tolerance for "zero" time-space coupling in the elliptic special case.
const OFF_DIAGONAL_TOL: f64 = 1e-12;

pub trait Metric: Send + Sync {
    fn dim(&self) -> usize;

    /// Symmetric (n+1)×(n+1) matrix [g^{jk}(x0, x)].
    fn coefficients(&self, x0: f64, x: &[f64]) -> DMatrix<f64>;
}

/// Flat wave operator ∂₀² - a²Δ: g^{00} = 1, g^{jj} = -a².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minkowski {
    pub speed: f64,
    pub dim: usize,
}

impl Metric for Minkowski {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coefficients(&self, _x0: f64, _x: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.dim + 1, self.dim + 1);
        g[(0, 0)] = 1.0;
        for j in 1..=self.dim {
            g[(j, j)] = -self.speed * self.speed;
        }
        g
    }
}

/// Diagonal metric with a smooth spatial modulation of the spatial block:
/// g^{jj}(x) = -spatial[j]·(1 + modulation·exp(-|x|²)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalMetric {
    pub g00: f64,
    pub spatial: Vec<f64>,
    #[serde(default)]
    pub modulation: f64,
}

impl Metric for DiagonalMetric {
    fn dim(&self) -> usize {
        self.spatial.len()
    }

    fn coefficients(&self, _x0: f64, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let factor = 1.0 + self.modulation * (-r2).exp();
        let mut g = DMatrix::zeros(n + 1, n + 1);
        g[(0, 0)] = self.g00;
        for (j, s) in self.spatial.iter().enumerate() {
            g[(j + 1, j + 1)] = -s * factor;
        }
        g
    }
}

/// Time-independent coefficients tabulated on a uniform lattice over
/// [-half_width, half_width]ⁿ and interpolated multilinearly. Each node holds
/// the (n+1)² entries in row-major order; nodes are ordered with the first
/// axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedMetric {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
    pub values: Vec<Vec<f64>>,
}

impl TabulatedMetric {
    pub fn validate(&self) -> Result<()> {
        let nodes = self.points.pow(self.dim as u32);
        let width = (self.dim + 1) * (self.dim + 1);
        if !(1..=2).contains(&self.dim) || self.points < 2 {
            return Err(Error::Config("tabulated metric needs dim 1..=2 and >= 2 points".into()));
        }
        if self.values.len() != nodes || self.values.iter().any(|v| v.len() != width) {
            return Err(Error::Config(format!(
                "tabulated metric expects {nodes} nodes of {width} entries"
            )));
        }
        for v in &self.values {
            let m = DMatrix::from_row_slice(self.dim + 1, self.dim + 1, v);
            if (&m - m.transpose()).amax() != 0.0 {
                return Err(Error::Config("tabulated metric entries must be symmetric".into()));
            }
        }
        Ok(())
    }

    fn axis_weights(&self, coord: f64) -> (usize, f64) {
        let h = 2.0 * self.half_width / (self.points - 1) as f64;
        let s = ((coord + self.half_width) / h).clamp(0.0, (self.points - 1) as f64);
        let i = (s.floor() as usize).min(self.points - 2);
        (i, s - i as f64)
    }
}

impl Metric for TabulatedMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coefficients(&self, _x0: f64, x: &[f64]) -> DMatrix<f64> {
        let n1 = self.dim + 1;
        let mut acc = vec![0.0; n1 * n1];
        let mut add = |node: usize, w: f64| {
            if w != 0.0 {
                for (a, v) in acc.iter_mut().zip(&self.values[node]) {
                    *a += w * v;
                }
            }
        };
        match self.dim {
            1 => {
                let (i, s) = self.axis_weights(x[0]);
                add(i, 1.0 - s);
                add(i + 1, s);
            }
            _ => {
                let (i, s) = self.axis_weights(x[0]);
                let (j, t) = self.axis_weights(x[1]);
                let p = self.points;
                add(j * p + i, (1.0 - s) * (1.0 - t));
                add(j * p + i + 1, s * (1.0 - t));
                add((j + 1) * p + i, (1.0 - s) * t);
                add((j + 1) * p + i + 1, s * t);
            }
        }
        DMatrix::from_row_slice(n1, n1, &acc)
    }
}

/// Metric selection as it appears in the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum MetricSpec {
    /// Speed defaults to the experiment's physical wave speed.
    Minkowski {
        #[serde(default)]
        speed: Option<f64>,
    },
    Diagonal(DiagonalMetric),
    Tabulated(TabulatedMetric),
}

impl MetricSpec {
    pub fn build(&self, dim: usize, default_speed: f64) -> Result<Box<dyn Metric>> {
        let metric: Box<dyn Metric> = match self {
            MetricSpec::Minkowski { speed } => Box::new(Minkowski {
                speed: speed.unwrap_or(default_speed),
                dim,
            }),
            MetricSpec::Diagonal(d) => Box::new(d.clone()),
            MetricSpec::Tabulated(t) => {
                t.validate()?;
                Box::new(t.clone())
            }
        };
        if metric.dim() != dim {
            return Err(Error::Config(format!(
                "metric dimension {} does not match grid dimension {dim}",
                metric.dim()
            )));
        }
        Ok(metric)
    }
}

/// Spacetime gradient (∂₀φ0, ∂₁φ0, …) of the shift time change.
fn phi0_gradient(profile: &CloakProfile, x0: f64, x: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; x.len() + 1];
    grad[0] = 1.0;
    if x0 >= 0.0 {
        grad[1..].copy_from_slice(&profile.c_grad(x));
    }
    grad
}

/// Coefficients of the operator in (y0, y) coordinates at the preimage
/// point (x0, x). The output is exactly symmetric.
pub fn transform_metric(metric: &dyn Metric, profile: &CloakProfile, x0: f64, x: &[f64]) -> DMatrix<f64> {
    let g = metric.coefficients(x0, x);
    let dphi = phi0_gradient(profile, x0, x);
    let n1 = dphi.len();
    let mut out = g.clone();
    for j in 1..n1 {
        let mut s = 0.0;
        for (p, dp) in dphi.iter().enumerate() {
            s += g[(p, j)] * dp;
        }
        out[(0, j)] = s;
        out[(j, 0)] = s;
    }
    out[(0, 0)] = quadratic_form(&g, &dphi);
    out
}

fn quadratic_form(g: &DMatrix<f64>, v: &[f64]) -> f64 {
    let mut s = 0.0;
    for (p, vp) in v.iter().enumerate() {
        for (r, vr) in v.iter().enumerate() {
            s += g[(p, r)] * vp * vr;
        }
    }
    s
}

/// Minimum of ĝ^{00} over the sample grid (spatial points × times).
pub fn check_hyperbolic_general(
    metric: &dyn Metric,
    profile: &CloakProfile,
    grid: &SampleGrid,
) -> FeasibilityReport {
    let samples = grid.times().iter().flat_map(|&t| {
        grid.points().iter().map(move |x| {
            let dphi = phi0_gradient(profile, t, x);
            let m = quadratic_form(&metric.coefficients(t, x), &dphi);
            (m, x.clone(), Some(t))
        })
    });
    FeasibilityReport::from_samples(samples)
}

/// A point of ℝ×∂D with its unit spacetime normal (ν0, ν1, …, νn).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNormal {
    pub x0: f64,
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelikeReport {
    /// Σ g^{jk} ν_j ν_k < 0 at every sample.
    pub timelike: bool,
    pub max_form: f64,
    /// Same test for the transformed coefficients ĝ.
    pub transformed_timelike: bool,
    pub transformed_max_form: f64,
    pub samples: usize,
}

pub fn check_timelike_boundary(
    metric: &dyn Metric,
    profile: &CloakProfile,
    boundary: &[BoundaryNormal],
) -> TimelikeReport {
    let mut max_form = f64::NEG_INFINITY;
    let mut transformed_max_form = f64::NEG_INFINITY;
    for b in boundary {
        let g = metric.coefficients(b.x0, &b.x);
        max_form = max_form.max(quadratic_form(&g, &b.normal));
        let gh = transform_metric(metric, profile, b.x0, &b.x);
        transformed_max_form = transformed_max_form.max(quadratic_form(&gh, &b.normal));
    }
    TimelikeReport {
        timelike: max_form < 0.0,
        max_form,
        transformed_timelike: transformed_max_form < 0.0,
        transformed_max_form,
        samples: boundary.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticReport {
    /// min over samples of g^{00} + Σ_{j,k≥1} g^{jk} c_j c_k.
    pub hyperbolic_min: f64,
    pub hyperbolic_holds: bool,
    /// |∇c|² ≤ g^{00} / C0 at every sample.
    pub bound_holds: bool,
    /// max over samples of |∇c|² · C0 / g^{00}; the bound holds iff ≤ 1.
    pub bound_ratio_max: f64,
    /// Spatial block satisfies Σ g^{jk} ξ_j ξ_k ≤ -C0 |ξ|² at every sample.
    pub ellipticity_verified: bool,
}

pub fn elliptic_bound_check(
    metric: &dyn Metric,
    ellipticity: f64,
    profile: &CloakProfile,
    grid: &SampleGrid,
) -> Result<EllipticReport> {
    let mut hyperbolic_min = f64::INFINITY;
    let mut bound_ratio_max = 0.0f64;
    let mut ellipticity_verified = true;
    for &t in grid.times() {
        for x in grid.points() {
            let g = metric.coefficients(t, x);
            let n = g.nrows() - 1;
            for j in 1..=n {
                if g[(0, j)].abs() > OFF_DIAGONAL_TOL || g[(j, 0)].abs() > OFF_DIAGONAL_TOL {
                    return Err(Error::PreconditionViolated(format!(
                        "g^(0{j}) = {} is not zero at x = {x:?}",
                        g[(0, j)]
                    )));
                }
            }
            let cg = profile.c_grad(x);
            let mut value = g[(0, 0)];
            for j in 0..n {
                for k in 0..n {
                    value += g[(j + 1, k + 1)] * cg[j] * cg[k];
                }
            }
            hyperbolic_min = hyperbolic_min.min(value);
            let grad2: f64 = cg.iter().map(|c| c * c).sum();
            bound_ratio_max = bound_ratio_max.max(grad2 * ellipticity / g[(0, 0)]);
            let spatial = g.view((1, 1), (n, n)).into_owned();
            let top = spatial.symmetric_eigenvalues().max();
            if top > -ellipticity * (1.0 - 1e-12) {
                ellipticity_verified = false;
            }
        }
    }
    Ok(EllipticReport {
        hyperbolic_min,
        hyperbolic_holds: hyperbolic_min > 0.0,
        bound_holds: bound_ratio_max <= 1.0,
        bound_ratio_max,
        ellipticity_verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{hyperbolicity_margin, margin_at};

    fn mink(a: f64) -> Minkowski {
        Minkowski { speed: a, dim: 2 }
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let p = CloakProfile::centered(0.0, 0.5, 2).unwrap();
        let m = DiagonalMetric {
            g00: 1.3,
            spatial: vec![0.7, 2.0],
            modulation: 0.4,
        };
        for x in [[0.1, 0.2], [0.3, -0.1], [1.0, 1.0]] {
            assert_eq!(transform_metric(&m, &p, 0.5, &x), m.coefficients(0.5, &x));
        }
    }

    #[test]
    fn plateau_point_is_identity() {
        let p = CloakProfile::centered(0.2, 1.0, 2).unwrap();
        let g = mink(1.5);
        assert_eq!(transform_metric(&g, &p, 1.0, &[0.1, 0.1]), g.coefficients(1.0, &[0.1, 0.1]));
    }

    #[test]
    fn minkowski_transform_entries() {
        // pick the point on the x-axis where |∇c| = s and compare with 1 - a²s², -a²s
        let p = CloakProfile::centered(0.05, 1.0, 2).unwrap();
        let a = 1.7;
        let x = [0.7, 0.0];
        let s = p.c_grad(&x)[0];
        let gh = transform_metric(&mink(a), &p, 0.2, &x);
        assert!((gh[(0, 0)] - (1.0 - a * a * s * s)).abs() < 1e-15);
        assert!((gh[(0, 1)] - (-a * a * s)).abs() < 1e-15);
        assert_eq!(gh[(0, 2)], 0.0);
        assert_eq!(gh, gh.transpose());
        // negative times see the identity gradient
        assert_eq!(transform_metric(&mink(a), &p, -0.1, &x), mink(a).coefficients(0.0, &x));
    }

    #[test]
    fn general_check_reduces_to_flat_margin() {
        let p = CloakProfile::centered(0.1, 1.0, 2).unwrap();
        let grid = SampleGrid::default_for(&p);
        let general = check_hyperbolic_general(&mink(2.0), &p, &grid);
        let flat = hyperbolicity_margin(&p, 2.0, &grid);
        assert!((general.margin_min - flat.margin_min).abs() < 1e-12);
        for x in grid.points() {
            let gh = transform_metric(&mink(2.0), &p, 0.0, x);
            assert!((gh[(0, 0)] - margin_at(&p, 2.0, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn general_check_diagonal_example() {
        // ∇c = (0.4, 0) against spatial block -diag(4, 4)
        let m = DiagonalMetric {
            g00: 1.0,
            spatial: vec![4.0, 4.0],
            modulation: 0.0,
        };
        let p = CloakProfile::centered(0.08, 1.0, 2).unwrap();
        let x = [0.75, 0.0];
        assert!((p.c_grad(&x)[0] + 0.3).abs() < 1e-12);
        let p = p.with_c0(0.08 * 0.4 / 0.3).unwrap();
        let r = check_hyperbolic_general(&m, &p, &SampleGrid::from_points(vec![x.to_vec()]));
        assert!((r.margin_min - 0.36).abs() < 1e-12, "{}", r.margin_min);
    }

    #[test]
    fn zero_amplitude_margin_is_min_g00() {
        let m = TabulatedMetric {
            dim: 1,
            half_width: 1.0,
            points: 2,
            values: vec![vec![2.0, 0.0, 0.0, -1.0], vec![0.5, 0.0, 0.0, -1.0]],
        };
        m.validate().unwrap();
        let p = CloakProfile::centered(0.0, 0.5, 1).unwrap();
        let r = check_hyperbolic_general(&m, &p, &SampleGrid::lattice(1.0, 1, 11));
        assert!((r.margin_min - 0.5).abs() < 1e-15);
        assert!(r.admissible);
    }

    #[test]
    fn timelike_examples() {
        let p = CloakProfile::centered(0.1, 0.5, 2).unwrap();
        let faces = vec![
            BoundaryNormal { x0: 0.3, x: vec![1.0, 0.0], normal: vec![0.0, 1.0, 0.0] },
            BoundaryNormal { x0: 0.3, x: vec![0.0, -1.0], normal: vec![0.0, 0.0, -1.0] },
        ];
        let r = check_timelike_boundary(&mink(1.5), &p, &faces);
        assert!(r.timelike && r.transformed_timelike);
        assert!((r.max_form + 2.25).abs() < 1e-15);

        let flipped = DiagonalMetric { g00: 1.0, spatial: vec![-1.0, -1.0], modulation: 0.0 };
        assert!(!check_timelike_boundary(&flipped, &p, &faces).timelike);

        let aniso = DiagonalMetric { g00: 1.0, spatial: vec![1.0, 9.0], modulation: 0.0 };
        let r = check_timelike_boundary(&aniso, &p, &faces[..1]);
        assert!(r.timelike);
        assert_eq!(r.max_form, -1.0);
    }

    #[test]
    fn elliptic_examples() {
        let flat = CloakProfile::centered(0.0, 0.5, 2).unwrap();
        let grid = SampleGrid::lattice(1.0, 2, 9);
        let r = elliptic_bound_check(&mink(1.0), 1.0, &flat, &grid).unwrap();
        assert!(r.hyperbolic_holds && r.bound_holds && r.ellipticity_verified);

        // ∇c = (0.6, 0), spatial block -diag(4, 4), C0 = 4
        let m = DiagonalMetric { g00: 1.0, spatial: vec![4.0, 4.0], modulation: 0.0 };
        let p = CloakProfile::centered(0.08 * 0.6 / 0.3, 1.0, 2).unwrap();
        let x = vec![0.75, 0.0];
        assert!((p.c_grad(&x)[0] + 0.6).abs() < 1e-12);
        let r = elliptic_bound_check(&m, 4.0, &p, &SampleGrid::from_points(vec![x])).unwrap();
        assert!(!r.bound_holds && !r.hyperbolic_holds);
        assert!((r.hyperbolic_min - (1.0 - 4.0 * 0.36)).abs() < 1e-12);
        assert!((r.bound_ratio_max - 0.36 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn elliptic_minkowski_bound_matches_flat_condition() {
        let a = 2.0;
        let p = CloakProfile::centered(0.9 * crate::symbol::max_admissible_c0(a, 1.0), 1.0, 2).unwrap();
        let grid = SampleGrid::default_for(&p);
        let r = elliptic_bound_check(&mink(a), a * a, &p, &grid).unwrap();
        assert!(r.bound_holds && r.hyperbolic_holds && r.ellipticity_verified);
        let max_g2 = p.max_grad_norm().powi(2);
        assert!((r.bound_ratio_max - max_g2 * a * a).abs() < 1e-9);
    }

    #[test]
    fn elliptic_rejects_time_space_coupling() {
        let m = TabulatedMetric {
            dim: 1,
            half_width: 1.0,
            points: 2,
            values: vec![vec![1.0, 0.1, 0.1, -1.0]; 2],
        };
        let p = CloakProfile::centered(0.0, 0.5, 1).unwrap();
        assert!(matches!(
            elliptic_bound_check(&m, 1.0, &p, &SampleGrid::lattice(1.0, 1, 3)),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn spec_roundtrip() {
        let s: MetricSpec = serde_json::from_str(r#"{"preset":"minkowski"}"#).unwrap();
        let m = s.build(2, 3.0).unwrap();
        assert_eq!(m.coefficients(0.0, &[0.0, 0.0])[(1, 1)], -9.0);
        let s: MetricSpec =
            serde_json::from_str(r#"{"preset":"diagonal","g00":1,"spatial":[1,2]}"#).unwrap();
        assert!(s.build(1, 1.0).is_err());
    }
}
