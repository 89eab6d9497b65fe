//! Hyperbolicity analysis of the time-shifted wave operator.
//!
//! For the shift φ0 = x0 + c(x) the transformed operator has principal symbol
//!
//! ```text
//! p(y, η) = η0² - a² Σ_j (η_j + c_j η0)²
//! ```
//!
//! which is strictly hyperbolic in y0 iff 1 - a²|∇c|² > 0. The same margin is
//! the ĝ⁰⁰ coefficient of the transformed general metric, see [`metric`].

pub mod metric;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{BumpShape, CloakProfile, SMOOTHSTEP_MAX_SLOPE};

pub use metric::{
    check_hyperbolic_general, check_timelike_boundary, elliptic_bound_check, transform_metric,
    BoundaryNormal, DiagonalMetric, EllipticReport, Metric, MetricSpec, Minkowski,
    TabulatedMetric, TimelikeReport,
};

/// Covector (η0; η) dual to (y0; y).
#[derive(Debug, Clone, PartialEq)]
pub struct Covector {
    pub eta0: f64,
    pub eta: Vec<f64>,
}

pub fn principal_symbol(a: f64, cgrad: &[f64], covector: &Covector) -> f64 {
    let Covector { eta0, eta } = covector;
    let spatial: f64 = eta
        .iter()
        .zip(cgrad)
        .map(|(e, c)| {
            let s = e + c * eta0;
            s * s
        })
        .sum();
    eta0 * eta0 - a * a * spatial
}

/// Roots η0 of p(y, η0, η) = 0 as `(plus, minus)`, taking the ± branches
/// of the closed-form quadratic formula.
///
/// Fails with [`Error::NotHyperbolic`] unless both roots are real, finite and
/// distinct. In particular the failure is guaranteed when 1 - a²|∇c|² ≤ 0 and
/// ∇c·η = 0.
pub fn characteristic_roots(a: f64, cgrad: &[f64], eta: &[f64]) -> Result<(f64, f64)> {
    let a2 = a * a;
    let dot: f64 = cgrad.iter().zip(eta).map(|(c, e)| c * e).sum();
    let grad2: f64 = cgrad.iter().map(|c| c * c).sum();
    let eta2: f64 = eta.iter().map(|e| e * e).sum();
    let margin = 1.0 - a2 * grad2;
    let disc = a2 * a2 * dot * dot + margin * a2 * eta2;
    if margin == 0.0 || !(disc > 0.0) {
        return Err(Error::NotHyperbolic { margin, floor: 0.0 });
    }
    let root = disc.sqrt();
    let plus = (a2 * dot + root) / margin;
    let minus = (a2 * dot - root) / margin;
    if !(plus.is_finite() && minus.is_finite()) {
        return Err(Error::NotHyperbolic { margin, floor: 0.0 });
    }
    Ok((plus, minus))
}

/// Pointwise strict-hyperbolicity expression 1 - a²|∇c(x)|².
pub fn margin_at(profile: &CloakProfile, a: f64, x: &[f64]) -> f64 {
    let g2: f64 = profile.c_grad(x).iter().map(|g| g * g).sum();
    1.0 - a * a * g2
}

/// Supremum of c0 keeping the margin strictly positive for the quintic bump.
pub fn max_admissible_c0(a: f64, c1: f64) -> f64 {
    c1 * 0.5 / (SMOOTHSTEP_MAX_SLOPE * a)
}

/// Same supremum for any bump shape.
pub fn max_admissible_c0_for(bump: BumpShape, a: f64, c1: f64) -> f64 {
    c1 * 0.5 / (bump.max_slope() * a)
}

/// Largest characteristic slope |η0|/|η| over all unit directions for a
/// gradient of norm `grad_norm`: a / (1 - a·|∇c|), attained for η ∥ ∇c.
pub fn max_characteristic_speed(a: f64, grad_norm: f64) -> Result<f64> {
    let (plus, minus) = characteristic_roots(a, &[grad_norm], &[1.0])?;
    Ok(plus.abs().max(minus.abs()))
}

/// Spatial (and optionally temporal) sample locations for the feasibility scans.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<Vec<f64>>,
    times: Vec<f64>,
}

impl SampleGrid {
    pub fn from_points(points: Vec<Vec<f64>>) -> Self {
        Self {
            points,
            times: vec![0.0],
        }
    }

    /// Polar samples of the transition annulus c1/2 ≤ r ≤ c1 with radial and
    /// arc spacing at most `spacing`, plus the centre. The radius 3c1/4 of
    /// steepest slope is always included.
    pub fn annulus(profile: &CloakProfile, spacing: f64) -> Self {
        let c1 = profile.c1();
        let center = profile.center();
        let width = 0.5 * c1;
        let mut intervals = (width / spacing).ceil().max(2.0) as usize;
        if intervals % 2 == 1 {
            intervals += 1;
        }
        let radii: Vec<f64> = (0..=intervals)
            .map(|i| width + width * i as f64 / intervals as f64)
            .collect();
        let mut points = vec![center.to_vec()];
        match profile.dim() {
            1 => {
                for &r in &radii {
                    points.push(vec![center[0] - r]);
                    points.push(vec![center[0] + r]);
                }
            }
            _ => {
                let arcs = ((2.0 * std::f64::consts::PI * c1 / spacing).ceil() as usize).div_ceil(4) * 4;
                for &r in &radii {
                    for k in 0..arcs {
                        let theta = 2.0 * std::f64::consts::PI * k as f64 / arcs as f64;
                        points.push(vec![center[0] + r * theta.cos(), center[1] + r * theta.sin()]);
                    }
                }
            }
        }
        Self::from_points(points)
    }

    /// Default annulus sampling at spacing c1/64.
    pub fn default_for(profile: &CloakProfile) -> Self {
        Self::annulus(profile, profile.c1() / 64.0)
    }

    /// Cartesian lattice over [-half_width, half_width]^dim.
    pub fn lattice(half_width: f64, dim: usize, per_axis: usize) -> Self {
        let per_axis = per_axis.max(2);
        let coord = |i: usize| -half_width + 2.0 * half_width * i as f64 / (per_axis - 1) as f64;
        let points = match dim {
            1 => (0..per_axis).map(|i| vec![coord(i)]).collect(),
            _ => (0..per_axis)
                .flat_map(|j| (0..per_axis).map(move |i| vec![coord(i), coord(j)]))
                .collect(),
        };
        Self::from_points(points)
    }

    pub fn with_times(mut self, times: Vec<f64>) -> Self {
        self.times = times;
        self
    }

    /// Concatenate the spatial samples of two grids (times of `self` kept).
    pub fn union(mut self, other: &SampleGrid) -> Self {
        self.points.extend(other.points.iter().cloned());
        self
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.points.len() * self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Minimum of a hyperbolicity expression over a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub margin_min: f64,
    pub argmin: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmin_time: Option<f64>,
    pub admissible: bool,
    pub samples: usize,
}

impl FeasibilityReport {
    pub(crate) fn from_samples(
        samples: impl Iterator<Item = (f64, Vec<f64>, Option<f64>)>,
    ) -> Self {
        let mut best: Option<(f64, Vec<f64>, Option<f64>)> = None;
        let mut count = 0;
        for (m, x, t) in samples {
            count += 1;
            let replace = match &best {
                None => true,
                Some((b, _, _)) => m < *b || m.is_nan(),
            };
            if replace {
                best = Some((m, x, t));
            }
        }
        let (margin_min, argmin, argmin_time) = best.unwrap_or((f64::INFINITY, Vec::new(), None));
        Self {
            margin_min,
            argmin,
            argmin_time,
            admissible: margin_min > 0.0,
            samples: count,
        }
    }
}

/// Scan 1 - a²|∇c|² over the grid's spatial samples.
pub fn hyperbolicity_margin(profile: &CloakProfile, a: f64, grid: &SampleGrid) -> FeasibilityReport {
    FeasibilityReport::from_samples(
        grid.points()
            .iter()
            .map(|x| (margin_at(profile, a, x), x.clone(), None)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn symbol_examples() {
        let cov = |e0: f64, e: f64| Covector { eta0: e0, eta: vec![e] };
        assert_eq!(principal_symbol(1.0, &[0.0], &cov(1.0, 1.0)), 0.0);
        assert_eq!(principal_symbol(2.0, &[0.0], &cov(1.0, 1.0)), -3.0);
        assert_eq!(principal_symbol(1.0, &[0.5], &cov(2.0, 0.0)), 3.0);
    }

    #[test]
    fn roots_examples() {
        assert_eq!(characteristic_roots(1.0, &[0.0, 0.0], &[0.0, 1.0]).unwrap(), (1.0, -1.0));
        let (p, m) = characteristic_roots(1.0, &[0.5, 0.0], &[0.0, 1.0]).unwrap();
        let expect = 0.75f64.sqrt() / 0.75;
        assert!(close(p, expect, 1e-12) && close(m, -expect, 1e-12));
        assert!((p - 1.154700).abs() < 1e-6);
        assert!(matches!(
            characteristic_roots(1.0, &[2.0, 0.0], &[0.0, 1.0]),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn roots_annihilate_symbol() {
        let cg = [0.3, -0.2];
        let eta = [0.7, 1.1];
        let (p, m) = characteristic_roots(1.3, &cg, &eta).unwrap();
        for r in [p, m] {
            let v = principal_symbol(1.3, &cg, &Covector { eta0: r, eta: eta.to_vec() });
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn max_admissible_examples() {
        assert!(close(max_admissible_c0(1.0, 15.0), 4.0, 1e-14));
        assert!(close(max_admissible_c0(2.0, 15.0), 2.0, 1e-14));
        assert!(max_admissible_c0(1e300, 15.0) < 1e-298);
    }

    #[test]
    fn margin_report_admissible_below_critical() {
        let p = CloakProfile::centered(3.0, 15.0, 2).unwrap();
        let r = hyperbolicity_margin(&p, 1.0, &SampleGrid::default_for(&p));
        assert!(r.admissible);
        let analytic = 1.0 - (15.0 * 3.0 / 60.0f64).powi(2);
        assert!(close(r.margin_min, analytic, 1e-12), "{} vs {analytic}", r.margin_min);
    }

    #[test]
    fn margin_report_critical_amplitude_is_rejected() {
        for dim in [1, 2] {
            let p = CloakProfile::centered(max_admissible_c0(1.0, 15.0), 15.0, dim).unwrap();
            let r = hyperbolicity_margin(&p, 1.0, &SampleGrid::default_for(&p));
            assert!(r.margin_min.abs() < 1e-12);
            assert!(!r.admissible, "dim {dim}: margin {}", r.margin_min);
        }
    }

    #[test]
    fn margin_with_zero_speed() {
        let p = CloakProfile::centered(100.0, 1.0, 2).unwrap();
        let r = hyperbolicity_margin(&p, 0.0, &SampleGrid::default_for(&p));
        assert_eq!(r.margin_min, 1.0);
        assert!(r.admissible);
    }

    #[test]
    fn annulus_spacing() {
        let p = CloakProfile::centered(1.0, 2.0, 2).unwrap();
        let g = SampleGrid::default_for(&p);
        assert!(g.points().iter().any(|x| (x[0] - 1.5).abs() < 1e-15 && x[1].abs() < 1e-15));
        assert!(g.len() > 33 * 400);
    }

    #[test]
    fn max_speed_brute_force() {
        // maximise the larger root over unit directions by dense sampling
        let a = 1.0;
        let cg = [0.5, 0.0];
        let mut best = 0.0f64;
        for k in 0..20000 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 20000.0;
            let (p, m) = characteristic_roots(a, &cg, &[th.cos(), th.sin()]).unwrap();
            best = best.max(p.abs()).max(m.abs());
        }
        let closed = max_characteristic_speed(a, 0.5).unwrap();
        assert!(close(best, 2.0, 1e-9));
        assert!(close(closed, 2.0, 1e-12));
        assert_eq!(max_characteristic_speed(1.0, 0.0).unwrap(), 1.0);
    }
}
