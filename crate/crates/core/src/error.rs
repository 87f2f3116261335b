use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("series has a vanishing leading coefficient")]
    VanishingLeadingCoefficient,

    #[error("inner series of a composition must have zero constant term")]
    NonzeroConstantTerm,

    #[error("invalid boundary density: {0}")]
    InvalidDensity(String),

    #[error("invalid driver: {0}")]
    InvalidDriver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("boundary degeneracy at t = {t}: min |f'| on circle = {min_abs_derivative:e}")]
    BoundaryDegeneracy { t: f64, min_abs_derivative: f64 },

    #[error("trajectory left the unit disk at t = {t} (|w| = {modulus})")]
    TrajectoryEscaped { t: f64, modulus: f64 },

    #[error("trajectory reached the slit-kernel singularity at t = {t}")]
    SlitSingularity { t: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("truncated map is not injective on the contour |w| = {radius}")]
    NotInjectiveOnContour { radius: f64 },

    #[error("sample point {point} is too close to the contour |w| = {radius}")]
    TooCloseToContour { point: f64, radius: f64 },

    #[error("newton inversion failed for z = {re}+{im}i")]
    InversionFailed { re: f64, im: f64 },

    #[error("neretin recursion fails at k = {k}: {reason}")]
    RecursionInconsistent { k: usize, reason: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI diagnostics and the C API.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::VanishingLeadingCoefficient => "vanishing_leading_coefficient",
            Error::NonzeroConstantTerm => "nonzero_constant_term",
            Error::InvalidDensity(_) => "invalid_density",
            Error::InvalidDriver(_) => "invalid_driver",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::BoundaryDegeneracy { .. } => "boundary_degeneracy",
            Error::TrajectoryEscaped { .. } => "trajectory_escaped",
            Error::SlitSingularity { .. } => "slit_singularity",
            Error::NonConvergence(_) => "non_convergence",
            Error::NotInjectiveOnContour { .. } => "not_injective_on_contour",
            Error::TooCloseToContour { .. } => "too_close_to_contour",
            Error::InversionFailed { .. } => "inversion_failed",
            Error::RecursionInconsistent { .. } => "recursion_inconsistent",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Config(_) => "config",
            Error::MalformedInput(_) => "malformed_input",
        }
    }

    /// Failures caused by bad input rather than by a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDensity(_)
                | Error::InvalidDriver(_)
                | Error::InvalidArgument(_)
                | Error::Config(_)
                | Error::MalformedInput(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
