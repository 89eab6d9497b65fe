use proptest::prelude::*;
use tcloak_core::profile::{BumpShape, CloakProfile, RegionLabel};
use tcloak_core::symbol::{
    characteristic_roots, check_hyperbolic_general, margin_at, principal_symbol, transform_metric, Covector,
    DiagonalMetric, Metric, Minkowski, SampleGrid,
};

fn bump() -> impl Strategy<Value = BumpShape> {
    prop_oneof![Just(BumpShape::Quintic), Just(BumpShape::Septic), Just(BumpShape::Smooth)]
}

prop_compose! {
    fn profile2()(c0 in 0.0f64..2.0, c1 in 0.1f64..2.0, cx in -1.0f64..1.0, cy in -1.0f64..1.0, b in bump())
        -> CloakProfile {
        CloakProfile::new(c0, c1, vec![cx, cy]).unwrap().with_bump(b)
    }
}

fn dist(p: &CloakProfile, x: &[f64]) -> f64 {
    x.iter().zip(p.center()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn time_change_round_trips(p in profile2(), x0 in -5.0f64..5.0, x in prop::array::uniform2(-3.0f64..3.0)) {
        let y0 = p.phi0(x0, &x);
        prop_assert_ne!(p.classify(y0, &x), RegionLabel::YZero);
        let back = p.psi(y0, &x).unwrap();
        if x0 < 0.0 || p.c_value(&x) == 0.0 {
            prop_assert_eq!(back, x0);
        } else {
            // y0 = fl(x0 + c) carries one rounding
            prop_assert!((back - x0).abs() <= y0.abs() * f64::EPSILON, "{} vs {}", back, x0);
        }
    }

    #[test]
    fn round_trip_is_exact_on_dyadic_values(p in profile2(), k in 0u32..4096, j in 0u32..4096) {
        // both x0 and c on the 2⁻¹² lattice below 1: the sum and difference are exact
        let x0 = k as f64 / 4096.0;
        let c = j as f64 / 4096.0;
        let p = p.with_c0(c).unwrap();
        let x = p.center().to_vec();
        prop_assert_eq!(p.c_value(&x), c);
        prop_assert_eq!(p.psi(p.phi0(x0, &x), &x).unwrap(), x0);
    }

    #[test]
    fn jump_at_zero_is_c(p in profile2(), x in prop::array::uniform2(-3.0f64..3.0), eps in 1e-300f64..1e-3) {
        prop_assert_eq!(p.phi0(0.0, &x), p.c_value(&x));
        prop_assert_eq!(p.phi0(-eps, &x), -eps);
    }

    #[test]
    fn phi0_is_increasing(p in profile2(), x in prop::array::uniform2(-3.0f64..3.0), a in -5.0f64..5.0, gap in 1e-9f64..3.0) {
        let b = a + gap;
        prop_assert!(p.phi0(a, &x) < p.phi0(b, &x));
    }

    #[test]
    fn flat_outside_the_ball(p in profile2(), r in 1.0f64..3.0, angle in 0.0f64..std::f64::consts::TAU) {
        let x = [p.center()[0] + r * p.c1() * angle.cos(), p.center()[1] + r * p.c1() * angle.sin()];
        prop_assume!(dist(&p, &x) >= p.c1());
        prop_assert_eq!(p.c_value(&x), 0.0);
        prop_assert_eq!(p.c_grad(&x), vec![0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_central_differences(p in profile2(), frac in 0.0f64..1.0, angle in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(p.c0() > 0.05);
        let c1 = p.c1();
        let step = 2e-3 * c1;
        // keep the stencil clear of both seams
        let r = c1 * (0.55 + 0.4 * frac);
        let x = [p.center()[0] + r * angle.cos(), p.center()[1] + r * angle.sin()];
        let g = p.c_grad(&x);
        let err = |h: f64| {
            (0..2).map(|j| {
                let (mut xp, mut xm) = (x, x);
                xp[j] += h;
                xm[j] -= h;
                ((p.c_value(&xp) - p.c_value(&xm)) / (2.0 * h) - g[j]).abs()
            }).fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(step), err(0.5 * step));
        prop_assume!(coarse > 1e-9 * p.c0() / c1);
        let ratio = coarse / fine;
        prop_assert!((3.0..5.0).contains(&ratio), "ratio {}", ratio);
    }
}

fn symbol_terms(a: f64, g: &[f64], eta0: f64, eta: &[f64]) -> f64 {
    let s: f64 = eta.iter().zip(g).map(|(e, c)| (e.abs() + (c * eta0).abs()).powi(2)).sum();
    eta0 * eta0 + a * a * s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2048))]

    #[test]
    fn roots_are_distinct_zeros_when_admissible(
        a in 0.1f64..3.0, frac in 0.0f64..0.999, angle in 0.0f64..std::f64::consts::TAU,
        eta in prop::array::uniform2(-5.0f64..5.0),
    ) {
        let g = [frac / a * angle.cos(), frac / a * angle.sin()];
        prop_assume!(eta.iter().any(|e| *e != 0.0));
        let (plus, minus) = characteristic_roots(a, &g, &eta).unwrap();
        prop_assert!(plus > minus);
        for r in [plus, minus] {
            let p = principal_symbol(a, &g, &Covector { eta0: r, eta: eta.to_vec() });
            prop_assert!(p.abs() <= 1e-9 * symbol_terms(a, &g, r, &eta), "{}", p);
        }
    }
}

#[derive(Debug, Clone)]
enum Sample {
    Generic,
    Orthogonal,
    Critical,
}

prop_compose! {
    fn root_sample()(
        kind in prop_oneof![Just(Sample::Generic), Just(Sample::Orthogonal), Just(Sample::Critical)],
        dim in 1usize..=2,
        a_pow in -2i32..=2,
        a in 0.05f64..3.0,
        g in prop::array::uniform2(-2.0f64..2.0),
        eta in prop::array::uniform2(-4.0f64..4.0),
        s in -3.0f64..3.0,
        sign in prop::bool::ANY,
    ) -> (f64, Vec<f64>, Vec<f64>) {
        match (kind, dim) {
            (Sample::Generic, 1) => (a, vec![g[0]], vec![eta[0]]),
            (Sample::Generic, _) => (a, g.to_vec(), eta.to_vec()),
            // η ⟂ ∇c exactly in floating point
            (Sample::Orthogonal, 1) => (a, vec![0.0], vec![eta[0]]),
            (Sample::Orthogonal, _) => (a, g.to_vec(), vec![-s * g[1], s * g[0]]),
            // a·|∇c| = 1 exactly: power-of-two speed, axis-aligned gradient
            (Sample::Critical, _) => {
                let a = 2f64.powi(a_pow);
                let c = if sign { 1.0 / a } else { -1.0 / a };
                let mut grad = vec![0.0; dim];
                grad[dim - 1] = c;
                let mut e = eta[..dim].to_vec();
                if s > 0.0 {
                    e[dim - 1] = 0.0;
                }
                (a, grad, e)
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    /// Classification against the closed-form margin: along directions with
    /// ∇c·η = 0 the roots fail exactly when 1 - a²|∇c|² ≤ 0; elsewhere they
    /// fail exactly when the symbol has no two distinct real zeros.
    #[test]
    fn root_classification(sample in root_sample()) {
        let (a, g, eta) = sample;
        prop_assume!(eta.iter().any(|e| *e != 0.0));
        let margin = 1.0 - a * a * g.iter().map(|c| c * c).sum::<f64>();
        let dot: f64 = g.iter().zip(&eta).map(|(c, e)| c * e).sum();
        let got = characteristic_roots(a, &g, &eta);
        let expected_fail = if dot == 0.0 || margin >= 0.0 {
            margin <= 0.0
        } else {
            // margin < 0: the symbol opens downwards; two zeros iff its peak is positive
            let vertex = a * a * dot / margin;
            principal_symbol(a, &g, &Covector { eta0: vertex, eta: eta.clone() }) <= 0.0
        };
        prop_assert_eq!(got.is_err(), expected_fail, "a {} g {:?} eta {:?} margin {}", a, g, eta, margin);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn metric_transform_identities(
        p in profile2(), a in 0.2f64..2.0, x0 in -2.0f64..2.0, x in prop::array::uniform2(-3.0f64..3.0),
        g00 in 0.2f64..2.0, s in prop::array::uniform2(0.2f64..2.0), modulation in -0.5f64..0.5,
    ) {
        let metrics: [Box<dyn Metric>; 2] = [
            Box::new(Minkowski { speed: a, dim: 2 }),
            Box::new(DiagonalMetric { g00, spatial: s.to_vec(), modulation }),
        ];
        let flat = p.with_c0(0.0).unwrap();
        for m in &metrics {
            let gh = transform_metric(m.as_ref(), &p, x0, &x);
            prop_assert_eq!(gh.clone() - gh.transpose(), nalgebra::DMatrix::zeros(3, 3));
            prop_assert_eq!(transform_metric(m.as_ref(), &flat, x0, &x), m.coefficients(x0, &x));
        }
        let gh = transform_metric(metrics[0].as_ref(), &p, x0, &x);
        let expected = if x0 >= 0.0 { margin_at(&p, a, &x) } else { 1.0 };
        prop_assert!((gh[(0, 0)] - expected).abs() <= 1e-12);
    }
}

#[test]
fn general_margin_matches_flat_margin_on_a_dense_grid() {
    let p = CloakProfile::centered(0.04, 0.25, 2).unwrap().with_bump(BumpShape::Septic);
    let grid = SampleGrid::default_for(&p).with_times(vec![0.5]);
    let general = check_hyperbolic_general(&Minkowski { speed: 1.0, dim: 2 }, &p, &grid);
    let flat = grid
        .points()
        .iter()
        .map(|x| margin_at(&p, 1.0, x))
        .fold(f64::INFINITY, f64::min);
    assert!((general.margin_min - flat).abs() <= 1e-12);
}
