//! End-to-end cloaking experiments: feasibility gate, physical solve, the
//! mapped and directly solved cloaked fields, all verification norms,
//! event invariance and convergence fits.

mod config;
mod metric_check;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{
    default_margin_floor, parse_override, ExperimentConfig, GridConfig, MetricConfig,
    PhysicalParams, PhysicsConfig, ProfileConfig, RunConfig,
};
pub use metric_check::{metric_check, MetricCheckReport};

use crate::error::{Error, Result, StageExt};
use crate::profile::CloakProfile;
use crate::symbol::{hyperbolicity_margin, max_admissible_c0_for, FeasibilityReport, SampleGrid};
use crate::transformed::{
    cross_agreement, glue_check, map_solution, residual_sweep, slice_initial_data,
    solve_transformed_above, CloakedField, SlabSettings,
};
use crate::wavesolver::{
    boundary_trace, continue_physical, solve_physical, suggest_dt, BoundarySignal, BoundaryTrace,
    Grid, SpacetimeField, SpatialGrid,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Fitted orders below this are flagged.
pub const MIN_ORDER: f64 = 1.5;

/// Errors at or below this multiple of the signal amplitude are treated as
/// rounding noise and get no fitted order.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Hyperbolicity margin of the configured profile, without gating.
pub fn feasibility(cfg: &ExperimentConfig) -> Result<FeasibilityReport> {
    let profile = cfg.profile()?;
    let a = cfg.params()?.speed;
    let mut report = hyperbolicity_margin(&profile, a, &SampleGrid::default_for(&profile));
    report.admissible = report.margin_min > cfg.experiment.margin_floor;
    Ok(report)
}

/// The gate every solver stage sits behind.
pub fn gate(cfg: &ExperimentConfig) -> Result<FeasibilityReport> {
    let report = feasibility(cfg)?;
    if !report.admissible {
        return Err(Error::NotHyperbolic {
            margin: report.margin_min,
            floor: cfg.experiment.margin_floor,
        });
    }
    Ok(report)
}

/// Norms measured on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    pub points: usize,
    pub h: f64,
    pub dt: f64,
    pub time_levels: usize,
    pub void_cells: usize,
    pub glue_value_jump: f64,
    pub glue_deriv_jump: f64,
    pub residual_max: f64,
    pub residual_cells: usize,
    pub cross_agreement_max: f64,
}

/// Everything one grid produces; fields are kept only when asked for.
pub struct LevelRun {
    pub metrics: LevelMetrics,
    pub u: SpacetimeField,
    pub v: CloakedField,
    pub direct: CloakedField,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<StageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub points: usize,
    pub seconds: f64,
}

impl Timings {
    fn time<T>(&mut self, stage: &str, points: usize, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.stages.push(StageTiming {
            stage: stage.to_string(),
            points,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Run the pipeline on one spatial grid. dt comes from the characteristic
/// speed, so it halves with h.
pub fn run_level(
    cfg: &ExperimentConfig,
    feasibility: &FeasibilityReport,
    space: &SpatialGrid,
    timings: &mut Timings,
) -> Result<LevelRun> {
    let params = cfg.params()?;
    let a = params.speed;
    let profile = cfg.profile()?;
    let n = space.points();
    let dt = suggest_dt(space, a, feasibility.margin_min, cfg.grid.cfl).stage("suggest_dt")?;
    let grid = Grid::new(space.clone(), dt, cfg.grid.t_min, cfg.grid.t_max, cfg.grid.cfl).stage("grid")?;

    let u = timings.time("solve_physical", n, || solve_physical(&grid, a, &cfg.signal).stage("solve_physical"))?;
    let v = timings.time("map_solution", n, || map_solution(&u, &profile).stage("map_solution"))?;
    let glue = timings.time("glue_check", n, || glue_check(&v).stage("glue_check"))?;
    let residual = timings.time("residual", n, || Ok(residual_sweep(&v, a)))?;
    let direct = timings.time("solve_transformed_above", n, || {
        let slice = slice_initial_data(&u, &profile).stage("slice_initial_data")?;
        let settings = SlabSettings {
            dt,
            y0_max: cfg.y0_max(),
            cfl_limit: cfg.grid.cfl,
        };
        solve_transformed_above(&slice, &cfg.signal, a, &profile, space, settings)
            .stage("solve_transformed_above")
    })?;
    let cross = timings.time("cross_agreement", n, || cross_agreement(&direct, &u).stage("cross_agreement"))?;

    let metrics = LevelMetrics {
        points: n,
        h: space.h(),
        dt,
        time_levels: u.levels(),
        void_cells: v.void_count(),
        glue_value_jump: glue.value_jump,
        glue_deriv_jump: glue.deriv_jump,
        residual_max: residual.max,
        residual_cells: residual.evaluated,
        cross_agreement_max: cross,
    };
    Ok(LevelRun { metrics, u, v, direct })
}

/// Observed order of one column against h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// Least-squares slope of log(error) against log(h); absent when the
    /// errors sit at the noise floor or fewer than two levels exist.
    pub slope: Option<f64>,
    /// Orders between consecutive levels, coarse to fine.
    pub pairs: Vec<PairOrder>,
    pub below_noise_floor: bool,
    /// True when a slope exists and is below [`MIN_ORDER`].
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOrder {
    pub coarse_points: usize,
    pub fine_points: usize,
    pub order: f64,
}

/// Fit `errors` against `h`; `scale` sets the noise floor.
pub fn fit_order(points: &[usize], h: &[f64], errors: &[f64], scale: f64) -> OrderFit {
    let floor = NOISE_FLOOR * scale.max(f64::MIN_POSITIVE);
    let below = errors.iter().all(|&e| e <= floor);
    let pairs = (1..errors.len())
        .map(|i| PairOrder {
            coarse_points: points[i - 1],
            fine_points: points[i],
            order: (errors[i - 1] / errors[i]).ln() / (h[i - 1] / h[i]).ln(),
        })
        .collect();
    let slope = if below || errors.len() < 2 {
        None
    } else {
        let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        Some(sxy / sxx)
    };
    let flagged = matches!(slope, Some(s) if !(s >= MIN_ORDER));
    OrderFit {
        slope,
        pairs,
        below_noise_floor: below,
        flagged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orders {
    pub glue_value: OrderFit,
    pub glue_deriv: OrderFit,
    pub residual: OrderFit,
    pub cross_agreement: OrderFit,
}

impl Orders {
    pub fn from_levels(levels: &[LevelMetrics], scale: f64) -> Self {
        let points: Vec<usize> = levels.iter().map(|l| l.points).collect();
        let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
        let col = |f: fn(&LevelMetrics) -> f64| -> Vec<f64> { levels.iter().map(f).collect() };
        Self {
            glue_value: fit_order(&points, &h, &col(|l| l.glue_value_jump), scale),
            glue_deriv: fit_order(&points, &h, &col(|l| l.glue_deriv_jump), scale),
            residual: fit_order(&points, &h, &col(|l| l.residual_max), scale),
            cross_agreement: fit_order(&points, &h, &col(|l| l.cross_agreement_max), scale),
        }
    }

    pub fn flagged(&self) -> Vec<&'static str> {
        [
            ("glue_value", &self.glue_value),
            ("glue_deriv", &self.glue_deriv),
            ("residual", &self.residual),
            ("cross_agreement", &self.cross_agreement),
        ]
        .into_iter()
        .filter(|(_, f)| f.flagged)
        .map(|(n, _)| n)
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub levels: Vec<LevelMetrics>,
    pub orders: Orders,
    pub flagged: Vec<String>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "points,h,dt,glue_value_jump,glue_deriv_jump,residual_max,cross_agreement_max\n",
        );
        for l in &self.levels {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                l.points, l.h, l.dt, l.glue_value_jump, l.glue_deriv_jump, l.residual_max, l.cross_agreement_max
            ));
        }
        s
    }
}

/// Run `levels` grids (each halving h and dt) and fit orders.
pub fn convergence_study(cfg: &ExperimentConfig, levels: usize) -> Result<(ConvergenceTable, Timings)> {
    if levels < 3 {
        return Err(Error::InsufficientLevels {
            required: 3,
            got: levels,
        });
    }
    let mut cfg = cfg.clone();
    cfg.experiment.levels = levels;
    cfg.validate()?;
    let feas = gate(&cfg).stage("gate")?;
    let mut timings = Timings::default();
    let mut rows = Vec::new();
    for space in cfg.spaces()? {
        rows.push(run_level(&cfg, &feas, &space, &mut timings)?.metrics);
    }
    let orders = Orders::from_levels(&rows, signal_scale(&cfg.signal));
    let flagged = orders.flagged().into_iter().map(String::from).collect();
    Ok((
        ConvergenceTable {
            levels: rows,
            orders,
            flagged,
        },
        timings,
    ))
}

fn signal_scale(f: &BoundarySignal) -> f64 {
    f.amplitude.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventInvariance {
    pub identical: bool,
    pub before: BoundaryTrace,
    pub after: BoundaryTrace,
    pub injected_cells: usize,
}

/// Overwrite every void cell with seeded noise in [-amplitude, amplitude]
/// and compare boundary traces bit for bit.
pub fn event_invariance_demo(
    v: &CloakedField,
    params: &PhysicalParams,
    seed: u64,
    amplitude: f64,
) -> Result<EventInvariance> {
    let mask = v.field.void_mask().ok_or(Error::NoVoidCells)?;
    let before = boundary_trace(&v.field, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = v.field.values().to_vec();
    let mut injected = 0;
    for (x, &void) in values.iter_mut().zip(mask) {
        if void {
            *x = amplitude * rng.random_range(-1.0..=1.0);
            injected += 1;
        }
    }
    let hit = SpacetimeField::from_parts(
        v.field.space().clone(),
        *v.field.axis(),
        values,
        Some(mask.to_vec()),
    );
    let after = boundary_trace(&hit, params)?;
    Ok(EventInvariance {
        identical: before.bit_identical(&after),
        before,
        after,
        injected_cells: injected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeControl {
    pub level: usize,
    pub node: usize,
    pub traces_differ: bool,
    pub max_difference: f64,
}

/// Write the payload into the last Y⁻ level at the node nearest the cloak
/// centre (one cell outside Y₀), let it evolve, rebuild v and compare traces.
pub fn negative_control(
    u: &SpacetimeField,
    profile: &CloakProfile,
    params: &PhysicalParams,
    f: &BoundarySignal,
    amplitude: f64,
) -> Result<NegativeControl> {
    let axis = u.axis();
    let zero = axis
        .zero_level()
        .filter(|&z| z >= 2)
        .ok_or_else(|| Error::PreconditionViolated("no Y⁻ history before t = 0".into()))?;
    let space = u.space();
    let node = (0..space.len())
        .min_by(|&p, &q| {
            let d = |k: usize| {
                let x = space.coords(k);
                profile
                    .center()
                    .iter()
                    .zip(x)
                    .map(|(c, xi)| (xi - c) * (xi - c))
                    .sum::<f64>()
            };
            d(p).total_cmp(&d(q))
        })
        .expect("grid is non-empty");
    let baseline = boundary_trace(&map_solution(u, profile)?.field, params)?;
    let level = zero - 1;
    let mut w = u.clone();
    let old = w.value(level, node);
    w.set(level, node, old + amplitude);
    continue_physical(&mut w, level, params.speed, f);
    let hit = boundary_trace(&map_solution(&w, profile)?.field, params)?;
    Ok(NegativeControl {
        level,
        node,
        traces_differ: !baseline.bit_identical(&hit),
        max_difference: baseline.max_abs_difference(&hit),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventInvarianceReport {
    pub seed: u64,
    pub payload_amplitude: f64,
    pub injected_cells: usize,
    pub void_injection_identical: bool,
    pub negative_control: NegativeControl,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub speed: f64,
    pub c0: f64,
    pub c1: f64,
    pub max_admissible_c0: f64,
    pub feasibility: FeasibilityReport,
    pub levels: Vec<LevelMetrics>,
    pub glue_value_jump: f64,
    pub glue_deriv_jump: f64,
    pub residual_max: f64,
    pub cross_agreement_max: f64,
    pub orders: Orders,
    pub trace_identity: bool,
    /// Absent when the profile has no void (c0 = 0).
    pub event_invariance: Option<EventInvarianceReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// What a run hands to the artifact writer: coarsest-level fields and traces.
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub report: ExperimentReport,
    pub timings: Timings,
    pub u: SpacetimeField,
    pub v: CloakedField,
    pub trace_u: BoundaryTrace,
    pub trace_v: BoundaryTrace,
}

pub fn run_cloak_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let feas = gate(cfg).stage("gate")?;
    let params = cfg.params()?;
    let profile = cfg.profile()?;
    let mut timings = Timings::default();
    let spaces = cfg.spaces()?;

    let mut rows = Vec::new();
    let mut coarse = None;
    for (i, space) in spaces.iter().enumerate() {
        let run = run_level(cfg, &feas, space, &mut timings)?;
        rows.push(run.metrics.clone());
        if i == 0 {
            coarse = Some((run.u, run.v));
        }
    }
    let (u, v) = coarse.expect("at least one level");
    let n = u.space().points();

    let (trace_u, trace_v) = timings.time("boundary_trace", n, || {
        Ok((
            boundary_trace(&u, &params).stage("boundary_trace")?,
            boundary_trace(&v.field, &params).stage("boundary_trace")?,
        ))
    })?;
    let trace_identity = trace_u.bit_identical(&trace_v);

    let event = if v.void_count() == 0 {
        None
    } else {
        let e = &cfg.experiment;
        Some(timings.time("event_invariance", n, || {
            let demo = event_invariance_demo(&v, &params, e.seed, e.payload_amplitude).stage("event_invariance")?;
            let control = negative_control(&u, &profile, &params, &cfg.signal, e.payload_amplitude)
                .stage("negative_control")?;
            let passed = demo.identical && control.traces_differ;
            Ok(EventInvarianceReport {
                seed: e.seed,
                payload_amplitude: e.payload_amplitude,
                injected_cells: demo.injected_cells,
                void_injection_identical: demo.identical,
                negative_control: control,
                passed,
            })
        })?)
    };

    let orders = Orders::from_levels(&rows, signal_scale(&cfg.signal));
    let finest = rows.last().expect("at least one level").clone();
    let finite = rows.iter().all(|l| {
        [l.glue_value_jump, l.glue_deriv_jump, l.residual_max, l.cross_agreement_max]
            .iter()
            .all(|x| x.is_finite())
    });
    let mut checks = vec![
        Check {
            name: "norms_finite".into(),
            passed: finite,
        },
        Check {
            name: "trace_identity".into(),
            passed: trace_identity,
        },
        Check {
            name: "event_invariance".into(),
            passed: event.as_ref().is_none_or(|e| e.passed),
        },
    ];
    for (name, fit) in [
        ("glue_value_order", &orders.glue_value),
        ("glue_deriv_order", &orders.glue_deriv),
        ("residual_order", &orders.residual),
        ("cross_agreement_order", &orders.cross_agreement),
    ] {
        checks.push(Check {
            name: name.into(),
            passed: !fit.flagged,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        speed: params.speed,
        c0: profile.c0(),
        c1: profile.c1(),
        max_admissible_c0: max_admissible_c0_for(profile.bump(), params.speed, profile.c1()),
        feasibility: feas,
        glue_value_jump: finest.glue_value_jump,
        glue_deriv_jump: finest.glue_deriv_jump,
        residual_max: finest.residual_max,
        cross_agreement_max: finest.cross_agreement_max,
        levels: rows,
        orders,
        trace_identity,
        event_invariance: event,
        checks,
        passed,
    };
    Ok(ExperimentRun {
        config: cfg.clone(),
        report,
        timings,
        u,
        v,
        trace_u,
        trace_v,
    })
}
