use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sphere of radius {radius} around {center:?} leaves the grid")]
    SphereOutOfDomain { center: Vec<f64>, radius: f64 },

    #[error("ball of radius {radius} around {center:?} leaves the grid")]
    BallOutOfDomain { center: Vec<f64>, radius: f64 },

    #[error("layer ({t_lo}, {t_hi}) for radius {radius} leaves the time interval ({t1}, {t2})")]
    LayerOutOfDomain {
        t_lo: f64,
        t_hi: f64,
        radius: f64,
        t1: f64,
        t2: f64,
    },

    #[error("radius {radius} outside the valid interval (0, {upper}) for side {side}")]
    RadiusOutsideValidInterval {
        radius: f64,
        upper: f64,
        side: &'static str,
    },

    #[error("backward heat kernel is singular at t = t0 = {t0}")]
    SingularTime { t0: f64 },

    #[error("component {component} value {value} outside the admissible domain of model {model}")]
    ModelDomain {
        model: String,
        component: usize,
        value: f64,
    },

    #[error("inconsistent custom model: |f - grad F| = {deviation} at u = {point:?}")]
    InconsistentCustomModel { point: Vec<f64>, deviation: f64 },

    #[error("unknown exact-solution key `{0}`")]
    UnknownCatalogKey(String),

    #[error("solver did not converge after {iterations} iterations; residual history {history:?}")]
    SolverDiverged {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("field is not a discrete solution: integration-by-parts residual {residual} exceeds gate {gate}")]
    FieldNotSolution { residual: f64, gate: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("homogeneity degree undefined: field vanishes on every probe sphere")]
    UndefinedDegree,

    #[error("manufactured field with negative degree {degree} is singular at the center; supply an exclusion radius")]
    SingularOrigin { degree: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field file, line {line}: {message}")]
    FieldFormat { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("expression, byte {position}: {message}")]
    Expr { position: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
