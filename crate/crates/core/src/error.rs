use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the laboratory can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point (y0 = {y0}) lies inside the cloaked region; the time change has no inverse there")]
    CloakedPoint { y0: f64 },

    #[error("not strictly hyperbolic: margin {margin:.6e} (required > {floor})")]
    NotHyperbolic { margin: f64, floor: f64 },

    #[error("CFL violation: Courant number {courant:.4} exceeds limit {limit:.4}")]
    CflViolation { courant: f64, limit: f64 },

    #[error("boundary signal support [{t_on}, {t_off}] is not inside the usable window [{t_first}, {t_last}]")]
    SignalOutsideWindow {
        t_on: f64,
        t_off: f64,
        t_first: f64,
        t_last: f64,
    },

    #[error("oracle requested at (x = {x}, t = {t}) after reflections arrive")]
    OracleDomainExceeded { x: f64, t: f64 },

    #[error("void cell inside a boundary trace stencil at level {level}")]
    VoidNearBoundary { level: usize },

    #[error("time {time} is outside the solution window [{first}, {last}]")]
    CoverageExceeded { time: f64, first: f64, last: f64 },

    #[error("residual stencil touches a void or non-Y+ cell")]
    StencilTouchesVoid,

    #[error("residual stencil touches the boundary or leaves the grid")]
    StencilTouchesBoundary,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("the cloaked field has no void cells")]
    NoVoidCells,

    #[error("convergence study needs at least {required} levels, got {got}")]
    InsufficientLevels { required: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, with stage labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
