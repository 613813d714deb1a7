use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature order {given} is below the required {required}")]
    InsufficientQuadrature { required: usize, given: usize },

    #[error("parameter `{name}` out of range: {reason}")]
    OutOfRange { name: &'static str, reason: String },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("singular complex time r = {r}, t = {t}: |1 - e^(-2η)| = {gap:e}")]
    SingularTime { r: f64, t: f64, gap: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("problem size {entries} exceeds the desk-scale guard {limit}")]
    SizeGuard { entries: usize, limit: usize },

    #[error("coefficient supported off the surface at (|ν| = {nu_degree}, λ = {lambda})")]
    OffSurface { nu_degree: usize, lambda: i64 },

    #[error("z = {re} + {im}i is a pole of Γ(z+1) not handled by a limit path")]
    GammaPole { re: f64, im: f64 },

    #[error("frequency window Λ = {lambda_max} is too small (need ≥ {required})")]
    FrequencyWindow { lambda_max: i64, required: i64 },

    #[error("time grid with {nt} nodes cannot resolve frequencies up to {lambda_max}")]
    TimeResolution { nt: usize, lambda_max: i64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("branch-ambiguous input: τ = 0 and t = 0")]
    BranchAmbiguous,

    #[error("all coefficients are zero")]
    ZeroCoefficients,

    #[error("system of {requested} functions does not fit a truncation of size {available}")]
    SystemTooLarge { requested: usize, available: usize },

    #[error("malformed field encoding: {0}")]
    Encoding(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn out_of_range(name: &'static str, reason: impl Into<String>) -> Error {
    Error::OutOfRange {
        name,
        reason: reason.into(),
    }
}
