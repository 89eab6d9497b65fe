//! Cloak geometry: the radial bump χ, the time shift c(x) = c0·χ(x), the
//! piecewise time change φ0 with its inverse ψ, and the Y⁻ / Y⁺ / Y₀
//! classification of spacetime points.
//!
//! χ is a quintic smoothstep in the radius:
//!
//! ```text
//! t    = clamp((r - c1/2) / (c1/2), 0, 1),   r = |x - center|
//! s(t) = 6t⁵ - 15t⁴ + 10t³
//! χ    = 1 - s(t)
//! ```
//!
//! so χ = 1 on the plateau r ≤ c1/2, χ = 0 for r ≥ c1, and χ is C² across
//! both seams. [`BumpShape::Septic`] uses s(t) = 35t⁴ - 84t⁵ + 70t⁶ - 20t⁷,
//! which is C³ across the seams. [`BumpShape::Smooth`] swaps s for the C^∞ step
//!
//! ```text
//! s(t) = f(t) / (f(t) + f(1-t)),   f(t) = exp(-1/t)
//! ```
//!
//! whose derivatives all vanish at both seams. Every derivative is closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest value of s'(t) = 30t²(1-t)², attained at t = 1/2.
pub const SMOOTHSTEP_MAX_SLOPE: f64 = 15.0 / 8.0;

/// Largest value of s'(t) = 140t³(1-t)³ for the septic step, at t = 1/2.
pub const SEPTIC_MAX_SLOPE: f64 = 35.0 / 16.0;

/// Largest slope of the C^∞ step, attained at t = 1/2.
pub const SMOOTH_STEP_MAX_SLOPE: f64 = 2.0;

/// Radial step used inside the transition annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    /// 6t⁵ - 15t⁴ + 10t³
    #[default]
    Quintic,
    /// 35t⁴ - 84t⁵ + 70t⁶ - 20t⁷, C³ at the seams
    Septic,
    /// exp(-1/t) blend, flat to all orders at the seams
    Smooth,
}

impl BumpShape {
    /// max s'(t) over [0, 1].
    pub fn max_slope(self) -> f64 {
        match self {
            BumpShape::Quintic => SMOOTHSTEP_MAX_SLOPE,
            BumpShape::Septic => SEPTIC_MAX_SLOPE,
            BumpShape::Smooth => SMOOTH_STEP_MAX_SLOPE,
        }
    }

    fn step(self, t: f64) -> f64 {
        match self {
            BumpShape::Quintic => smoothstep(t),
            BumpShape::Septic => t * t * t * t * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t))),
            BumpShape::Smooth => {
                let (g, h) = (flat(t), flat(1.0 - t));
                g / (g + h)
            }
        }
    }

    /// (s'(t), s''(t))
    fn step_derivatives(self, t: f64) -> (f64, f64) {
        match self {
            BumpShape::Quintic => (smoothstep_d1(t), smoothstep_d2(t)),
            BumpShape::Septic => {
                let u = t * (1.0 - t);
                (140.0 * u * u * u, 420.0 * u * u * (1.0 - 2.0 * t))
            }
            BumpShape::Smooth => {
                let (g, g1, g2) = flat_derivatives(t);
                let (h, h1, h2) = flat_derivatives(1.0 - t);
                let (h1, h2) = (-h1, h2);
                let d = g + h;
                let d1 = g1 + h1;
                let d2 = g2 + h2;
                let num = g1 * d - g * d1;
                (num / (d * d), (g2 * d - g * d2) / (d * d) - 2.0 * d1 * num / (d * d * d))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloakProfile {
    c0: f64,
    c1: f64,
    center: Vec<f64>,
    #[serde(default)]
    bump: BumpShape,
}

/// Which piece of spacetime a point (y0, y) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    /// y0 < 0
    YMinus,
    /// y0 ≥ c(y)
    YPlus,
    /// 0 ≤ y0 < c(y), the cloaked void
    YZero,
}

impl CloakProfile {
    /// `c0 = 0` is accepted and yields the identity time change.
    pub fn new(c0: f64, c1: f64, center: Vec<f64>) -> Result<Self> {
        if !(c0.is_finite() && c0 >= 0.0) {
            return Err(Error::Config(format!("profile.c0 must be finite and >= 0, got {c0}")));
        }
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(Error::Config(format!("profile.c1 must be finite and > 0, got {c1}")));
        }
        if !(1..=2).contains(&center.len()) {
            return Err(Error::Config(format!(
                "profile dimension must be 1 or 2, got {}",
                center.len()
            )));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("profile.center must be finite".into()));
        }
        Ok(Self {
            c0,
            c1,
            center,
            bump: BumpShape::Quintic,
        })
    }

    /// Bump centred at the origin.
    pub fn centered(c0: f64, c1: f64, dim: usize) -> Result<Self> {
        Self::new(c0, c1, vec![0.0; dim])
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn bump(&self) -> BumpShape {
        self.bump
    }

    pub fn with_bump(mut self, bump: BumpShape) -> Self {
        self.bump = bump;
        self
    }

    /// Same geometry with a different amplitude.
    pub fn with_c0(&self, c0: f64) -> Result<Self> {
        Ok(Self::new(c0, self.c1, self.center.clone())?.with_bump(self.bump))
    }

    fn radius(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        x.iter()
            .zip(&self.center)
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum::<f64>()
            .sqrt()
    }

    /// Radial coordinate of the transition layer, or `None` off the layer.
    fn layer_coordinate(&self, r: f64) -> Option<f64> {
        let half = 0.5 * self.c1;
        if r <= half || r >= self.c1 {
            None
        } else {
            Some((r - half) / half)
        }
    }

    pub fn chi(&self, x: &[f64]) -> f64 {
        let r = self.radius(x);
        if r <= 0.5 * self.c1 {
            1.0
        } else if r >= self.c1 {
            0.0
        } else {
            let t = (r - 0.5 * self.c1) / (0.5 * self.c1);
            1.0 - self.bump.step(t)
        }
    }

    /// Radial derivatives (χ'(r), χ''(r)).
    fn chi_radial_derivatives(&self, r: f64) -> (f64, f64) {
        match self.layer_coordinate(r) {
            None => (0.0, 0.0),
            Some(t) => {
                let half = 0.5 * self.c1;
                let (s1, s2) = self.bump.step_derivatives(t);
                (-s1 / half, -s2 / (half * half))
            }
        }
    }

    pub fn c_value(&self, x: &[f64]) -> f64 {
        self.c0 * self.chi(x)
    }

    pub fn c_grad(&self, x: &[f64]) -> Vec<f64> {
        let r = self.radius(x);
        let (d1, _) = self.chi_radial_derivatives(r);
        if d1 == 0.0 {
            return vec![0.0; self.dim()];
        }
        x.iter()
            .zip(&self.center)
            .map(|(xi, ci)| self.c0 * d1 * (xi - ci) / r)
            .collect()
    }

    /// Δc = c0·(χ'' + (n-1)/r·χ').
    pub fn c_laplacian(&self, x: &[f64]) -> f64 {
        let r = self.radius(x);
        let (d1, d2) = self.chi_radial_derivatives(r);
        if d1 == 0.0 && d2 == 0.0 {
            return 0.0;
        }
        let n = self.dim() as f64;
        self.c0 * (d2 + (n - 1.0) * d1 / r)
    }

    /// Closed-form max |∇c|: 15·c0 / (4·c1) for the quintic, 4·c0 / c1 for
    /// the C^∞ step.
    pub fn max_grad_norm(&self) -> f64 {
        self.c0 * self.bump.max_slope() / (0.5 * self.c1)
    }

    /// The time change: x0 + c(x) for x0 ≥ 0, x0 otherwise.
    pub fn phi0(&self, x0: f64, x: &[f64]) -> f64 {
        if x0 >= 0.0 {
            x0 + self.c_value(x)
        } else {
            x0
        }
    }

    /// Inverse of [`phi0`](Self::phi0) on Y⁻ ∪ Y⁺.
    pub fn psi(&self, y0: f64, y: &[f64]) -> Result<f64> {
        match self.classify(y0, y) {
            RegionLabel::YMinus => Ok(y0),
            RegionLabel::YPlus => Ok(y0 - self.c_value(y)),
            RegionLabel::YZero => Err(Error::CloakedPoint { y0 }),
        }
    }

    pub fn classify(&self, y0: f64, y: &[f64]) -> RegionLabel {
        if y0 < 0.0 {
            RegionLabel::YMinus
        } else if y0 < self.c_value(y) {
            RegionLabel::YZero
        } else {
            RegionLabel::YPlus
        }
    }

    /// True when the closed ball |x - center| ≤ c1 stays at least `clearance`
    /// away from every face of the box [-half_width, half_width]ⁿ.
    pub fn ball_inside_box(&self, half_width: f64, clearance: f64) -> bool {
        self.center
            .iter()
            .all(|ci| ci.abs() + self.c1 + clearance < half_width)
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn smoothstep_d1(t: f64) -> f64 {
    let u = t * (1.0 - t);
    30.0 * u * u
}

fn smoothstep_d2(t: f64) -> f64 {
    60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}

fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// exp(-1/t) and its first two derivatives.
fn flat_derivatives(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / t).exp();
    let t2 = t * t;
    (f, f / t2, f * (1.0 - 2.0 * t) / (t2 * t2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof2() -> CloakProfile {
        CloakProfile::new(0.3, 1.0, vec![0.1, -0.2]).unwrap()
    }

    #[test]
    fn chi_reference_values() {
        let p = prof2();
        assert_eq!(p.chi(&[0.1, -0.2]), 1.0);
        assert_eq!(p.chi(&[1.1, -0.2]), 0.0);
        assert!((p.chi(&[0.85, -0.2]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn plateau_values() {
        let p = prof2();
        assert_eq!(p.c_value(p.center()), 0.3);
        assert_eq!(p.c_grad(p.center()), vec![0.0, 0.0]);
        assert_eq!(p.c_laplacian(&[0.2, -0.2]), 0.0);
    }

    #[test]
    fn max_gradient_matches_sampled_maximum() {
        let p = CloakProfile::centered(0.2, 0.8, 1).unwrap();
        let sampled = (0..=4000)
            .map(|i| p.c_grad(&[0.8 * i as f64 / 4000.0])[0].abs())
            .fold(0.0, f64::max);
        let closed = 15.0 * 0.2 / (4.0 * 0.8);
        assert!((sampled - closed).abs() < 1e-12, "{sampled} vs {closed}");
        assert!((p.max_grad_norm() - closed).abs() < 1e-15);
    }

    #[test]
    fn phi0_branches() {
        let p = prof2();
        assert_eq!(p.phi0(-1.0, &[0.0, 0.0]), -1.0);
        assert_eq!(p.phi0(0.0, p.center()), 0.3);
        assert_eq!(p.phi0(2.0, &[5.0, 5.0]), 2.0);
    }

    #[test]
    fn psi_inverts_and_rejects_void() {
        let p = prof2();
        assert_eq!(p.psi(-3.0, &[0.0, 0.0]).unwrap(), -3.0);
        assert!((p.psi(1.3, p.center()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            p.psi(0.15, p.center()),
            Err(Error::CloakedPoint { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let p = prof2();
        assert_eq!(p.classify(-0.1, p.center()), RegionLabel::YMinus);
        assert_eq!(p.classify(0.15, p.center()), RegionLabel::YZero);
        assert_eq!(p.classify(0.5, &[3.0, 3.0]), RegionLabel::YPlus);
        // closure conventions
        assert_eq!(p.classify(0.0, p.center()), RegionLabel::YZero);
        assert_eq!(p.classify(0.3, p.center()), RegionLabel::YPlus);
        assert_eq!(p.classify(0.0, &[3.0, 3.0]), RegionLabel::YPlus);
    }

    #[test]
    fn jump_at_zero_equals_c() {
        let p = prof2();
        for x in [[0.1, -0.2], [0.6, 0.1], [0.9, -0.2], [2.0, 0.0]] {
            let below = p.phi0(-1e-300, &x);
            let at = p.phi0(0.0, &x);
            assert!((at - below - p.c_value(&x)).abs() < 1e-299 + 1e-16);
        }
    }

    #[test]
    fn gradient_is_second_order_consistent_with_values() {
        let p = prof2();
        let x = [0.55, 0.15];
        let g = p.c_grad(&x);
        let err = |h: f64| {
            (0..2)
                .map(|j| {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    ((p.c_value(&xp) - p.c_value(&xm)) / (2.0 * h) - g[j]).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let p = prof2();
        let x = [0.5, 0.3];
        let h = 1e-4;
        let mut lap = -4.0 * p.c_value(&x);
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            lap += p.c_value(&xp) + p.c_value(&xm);
        }
        lap /= h * h;
        assert!((lap - p.c_laplacian(&x)).abs() < 1e-5 * p.c_laplacian(&x).abs().max(1.0));
    }

    fn smooth(c0: f64, c1: f64) -> CloakProfile {
        CloakProfile::centered(c0, c1, 1).unwrap().with_bump(BumpShape::Smooth)
    }

    #[test]
    fn smooth_step_values_and_slope() {
        let p = smooth(0.2, 0.8);
        assert!((p.chi(&[0.6]) - 0.5).abs() < 1e-15);
        assert_eq!(p.chi(&[0.4]), 1.0);
        assert_eq!(p.chi(&[0.8]), 0.0);
        let sampled = (0..=8000)
            .map(|i| p.c_grad(&[0.8 * i as f64 / 8000.0])[0].abs())
            .fold(0.0, f64::max);
        assert!((sampled - p.max_grad_norm()).abs() < 1e-12, "{sampled}");
        assert!((p.max_grad_norm() - 4.0 * 0.2 / 0.8).abs() < 1e-15);
    }

    #[test]
    fn smooth_step_derivatives_match_differences() {
        let p = smooth(0.3, 1.0);
        let h = 1e-5;
        for r in [0.52, 0.6, 0.75, 0.9, 0.98] {
            let fd1 = (p.c_value(&[r + h]) - p.c_value(&[r - h])) / (2.0 * h);
            let fd2 = (p.c_value(&[r + h]) - 2.0 * p.c_value(&[r]) + p.c_value(&[r - h])) / (h * h);
            assert!((fd1 - p.c_grad(&[r])[0]).abs() < 1e-8, "{r}");
            assert!((fd2 - p.c_laplacian(&[r])).abs() < 1e-4, "{r}");
        }
        // flat to all orders at the seams
        assert!(p.c_grad(&[0.5000001])[0].abs() < 1e-100);
    }

    #[test]
    fn septic_step_slope_and_derivatives() {
        let p = CloakProfile::centered(0.3, 1.0, 1).unwrap().with_bump(BumpShape::Septic);
        assert!((p.chi(&[0.75]) - 0.5).abs() < 1e-15);
        let sampled = (0..=8000)
            .map(|i| p.c_grad(&[i as f64 / 8000.0])[0].abs())
            .fold(0.0, f64::max);
        assert!((sampled - p.max_grad_norm()).abs() < 1e-12, "{sampled}");
        assert!((p.max_grad_norm() - 0.3 * 35.0 / 8.0).abs() < 1e-15);
        let h = 1e-5;
        for r in [0.52, 0.6, 0.75, 0.9, 0.98] {
            let fd1 = (p.c_value(&[r + h]) - p.c_value(&[r - h])) / (2.0 * h);
            let fd2 = (p.c_value(&[r + h]) - 2.0 * p.c_value(&[r]) + p.c_value(&[r - h])) / (h * h);
            assert!((fd1 - p.c_grad(&[r])[0]).abs() < 1e-8, "{r}");
            assert!((fd2 - p.c_laplacian(&[r])).abs() < 1e-4, "{r}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CloakProfile::new(-1.0, 1.0, vec![0.0]).is_err());
        assert!(CloakProfile::new(1.0, 0.0, vec![0.0]).is_err());
        assert!(CloakProfile::new(1.0, 1.0, vec![0.0; 3]).is_err());
    }
}
