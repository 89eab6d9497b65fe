use serde::Serialize;

use super::field::SpacetimeField;
use super::signal::Face;
use crate::error::{Error, Result};
use crate::experiment::PhysicalParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySample {
    pub face: Face,
    /// Flat node index.
    pub node: usize,
    /// Position along the face (0 in 1D).
    pub along: usize,
}

/// What an observer on ℝ × ∂D records: Dirichlet values, outward normal
/// derivatives and the force T·∂u/∂n, level-major (`level * samples + s`).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub times: Vec<f64>,
    pub samples: Vec<BoundarySample>,
    pub dirichlet: Vec<f64>,
    pub normal_derivative: Vec<f64>,
    pub force: Vec<f64>,
}

impl BoundaryTrace {
    /// Bitwise equality of times and all three channels.
    pub fn bit_identical(&self, other: &BoundaryTrace) -> bool {
        fn same(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        }
        self.samples == other.samples
            && same(&self.times, &other.times)
            && same(&self.dirichlet, &other.dirichlet)
            && same(&self.normal_derivative, &other.normal_derivative)
            && same(&self.force, &other.force)
    }

    pub fn max_abs_difference(&self, other: &BoundaryTrace) -> f64 {
        let d = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        d(&self.dirichlet, &other.dirichlet).max(d(&self.force, &other.force))
    }
}

/// Extract traces on every face. The normal derivative is the second-order
/// one-sided difference (3u_b - 4u_{b-1} + u_{b-2}) / 2h, stepping inward.
pub fn boundary_trace(field: &SpacetimeField, params: &PhysicalParams) -> Result<BoundaryTrace> {
    let space = field.space();
    let h = space.h();
    let mut samples = Vec::new();
    for &face in Face::all(space.dim()) {
        for (along, node) in face.nodes(space).into_iter().enumerate() {
            samples.push(BoundarySample { face, node, along });
        }
    }
    let ns = samples.len();
    let levels = field.levels();
    let mut dirichlet = Vec::with_capacity(levels * ns);
    let mut normal_derivative = Vec::with_capacity(levels * ns);
    let mut force = Vec::with_capacity(levels * ns);
    for m in 0..levels {
        let u = field.level(m);
        for s in &samples {
            let st = space.stride(s.face.axis());
            let (b, i1, i2) = if s.face.is_low() {
                (s.node, s.node + st, s.node + 2 * st)
            } else {
                (s.node, s.node - st, s.node - 2 * st)
            };
            if [b, i1, i2].iter().any(|&k| field.is_void(m, k)) {
                return Err(Error::VoidNearBoundary { level: m });
            }
            let dn = (3.0 * u[b] - 4.0 * u[i1] + u[i2]) / (2.0 * h);
            dirichlet.push(u[b]);
            normal_derivative.push(dn);
            force.push(params.tension * dn);
        }
    }
    Ok(BoundaryTrace {
        times: (0..levels).map(|m| field.time(m)).collect(),
        samples,
        dirichlet,
        normal_derivative,
        force,
    })
}
