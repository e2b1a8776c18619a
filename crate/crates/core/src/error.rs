use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Angle requested for the zero vector.
    ZeroVector,
    /// A matrix expected in `Sp(1)` has determinant too far from one.
    NotSymplectic { det: f64 },
    /// Polar factor with non-positive trace.
    CorruptDecomposition { trace: f64 },
    /// Consecutive samples of a path rotate by too much to be lifted.
    StepContract { index: usize, jump: f64 },
    /// `(theta_bar - theta(T)) / pi` is not an even integer.
    LiftCorrupted { k: f64 },
    /// Endpoint classified as `Gamma+` with `theta_bar == 0`.
    InconsistentEndpoint { theta_bar: f64 },
    /// `tau_bar` too small for the contracting eigendirection to be defined.
    DirectionUndefined { tau_bar: f64 },
    /// Fundamental solution lost symplecticity.
    DeterminantDrift { drift: f64 },
    /// Adaptive integrator could not meet its tolerance.
    StepSizeCollapse { t: f64, h: f64 },
    /// Adaptive integrator hit its step limit.
    TooManySteps { t: f64 },
    /// A lifted trajectory came too close to the origin.
    NearOrigin { t: f64, r: f64 },
    /// A field vanishes (numerically) on the loop whose winding was requested.
    NearZeroOnLoop { phi: f64, r: f64, norm: f64 },
    /// Loop refinement did not converge.
    RefinementExhausted,
    /// Accumulated angle was not an integer multiple of `2 pi`.
    NonIntegerWinding { turns: f64 },
    /// Evaluation budget used up.
    BudgetExhausted { evaluations: usize },
    /// A linearization required to be nonresonant is resonant.
    Resonant { at: &'static str, nullity: u8 },
    /// The system does not declare a needed linearization.
    MissingLinearization { at: &'static str },
    /// No radius satisfying the rotation and degree bounds within budget.
    TwistRadiiNotFound { at: &'static str, last_radius: f64 },
    /// A sandwich condition is violated at `(t, x)`.
    SandwichViolation { t: f64, x: f64, value: f64, lower: f64, upper: f64 },
    /// Bounds of a sandwich have different indices or are resonant.
    SandwichIndexMismatch { lower: i64, upper: i64 },
    /// Generic precondition failure.
    Precondition(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroVector => write!(f, "angle of the zero vector is undefined"),
            Error::NotSymplectic { det } => write!(f, "matrix is not symplectic (det = {det})"),
            Error::CorruptDecomposition { trace } => {
                write!(f, "polar factor has non-positive trace {trace}")
            }
            Error::StepContract { index, jump } => {
                write!(f, "rotation step {jump} at sample {index} exceeds pi/2; resample more finely")
            }
            Error::LiftCorrupted { k } => write!(f, "lap count {k} is not an even integer"),
            Error::InconsistentEndpoint { theta_bar } => {
                write!(f, "Gamma+ endpoint with theta_bar = {theta_bar}")
            }
            Error::DirectionUndefined { tau_bar } => {
                write!(f, "eigendirection undefined for tau_bar = {tau_bar}")
            }
            Error::DeterminantDrift { drift } => {
                write!(f, "determinant drift {drift} exceeds tolerance")
            }
            Error::StepSizeCollapse { t, h } => write!(f, "step size collapsed to {h} at t = {t}"),
            Error::TooManySteps { t } => write!(f, "step limit reached at t = {t}"),
            Error::NearOrigin { t, r } => write!(f, "trajectory reached r = {r} at t = {t}"),
            Error::NearZeroOnLoop { phi, r, norm } => {
                write!(f, "field nearly vanishes on the loop at phi = {phi}, r = {r} (|f| = {norm})")
            }
            Error::RefinementExhausted => write!(f, "loop refinement exhausted"),
            Error::NonIntegerWinding { turns } => {
                write!(f, "accumulated winding {turns} is not an integer")
            }
            Error::BudgetExhausted { evaluations } => {
                write!(f, "evaluation budget exhausted after {evaluations} evaluations")
            }
            Error::Resonant { at, nullity } => {
                write!(f, "linearization at {at} is resonant (nullity {nullity})")
            }
            Error::MissingLinearization { at } => write!(f, "no linearization declared at {at}"),
            Error::TwistRadiiNotFound { at, last_radius } => {
                write!(f, "rotation bounds at {at} not met down/up to radius {last_radius}")
            }
            Error::SandwichViolation { t, x, value, lower, upper } => {
                write!(f, "sandwich violated at t = {t}, x = {x}: {lower} < {value} < {upper} fails")
            }
            Error::SandwichIndexMismatch { lower, upper } => {
                write!(f, "sandwich bounds have indices {lower} and {upper} (or are resonant)")
            }
            Error::Precondition(msg) => write!(f, "precondition failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
