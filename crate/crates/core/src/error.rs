//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the coefficient pipeline, the
/// asymptotic predictors and the numerical verification machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// A right-hand side returned NaN or an infinity at a stencil point.
    #[error("non-finite evaluation of the right-hand side at ({x}, {y}, {z}; delta={delta})")]
    NonFiniteEvaluation { x: f64, y: f64, z: f64, delta: f64 },

    /// The linear stability condition D < 0 is violated.
    #[error("stability violation: D = {d} but the pipeline requires D < 0")]
    StabilityViolation { d: f64 },

    /// The fold non-degeneracy F_xx != 0 is violated.
    #[error("degenerate fold: |F_xx| = {fxx_abs} is below tolerance")]
    DegenerateFold { fxx_abs: f64 },

    /// A coefficient the asymptotic prediction divides by vanishes.
    #[error("degenerate coefficient: {name} = {value} (prediction requires it nonzero)")]
    DegenerateCoefficients { name: &'static str, value: f64 },

    /// alpha2 * beta1 <= 0, so the predicted J0* would not be positive.
    #[error("negative discriminant: alpha2*beta1 = {product} <= 0, no period-doubling point")]
    NegativeDiscriminant { product: f64 },

    /// An argument left the domain of an asymptotic formula.
    #[error("{what} = {value} is outside the admissible range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    /// An iteration failed to converge.
    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The adaptive integrator was forced below the minimal step size.
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    /// Integration exceeded the configured time budget.
    #[error("max integration time {max_time} exceeded")]
    MaxTimeExceeded { max_time: f64 },

    /// No directed section crossing was found before the time budget ran out
    /// or the trajectory escaped the region of interest.
    #[error("no return to the section within t <= {max_time}")]
    NoReturn { max_time: f64 },

    /// The flow is (numerically) tangent to the section at the crossing.
    #[error("tangential section crossing at t = {t} (transversal derivative {derivative:e})")]
    TangentialCrossing { t: f64, derivative: f64 },

    /// Floquet multipliers form a complex pair where a real one was required.
    #[error("multipliers form a complex pair {re} +/- {im}i (|Im| above tolerance {tol:e})")]
    ComplexPair { re: f64, im: f64, tol: f64 },

    /// No periodic orbit could be located at the requested parameters.
    #[error("no periodic orbit found: {reason}")]
    NoOrbit { reason: String },

    /// The bisection bracket does not straddle a sign change.
    #[error("invalid bracket [{lo}, {hi}]: test function has the same sign at both ends")]
    BracketInvalid { lo: f64, hi: f64 },

    /// Admissibility conditions failed ahead of the coefficient pipeline.
    #[error("admissibility conditions failed: {failing}")]
    ConditionsFailed { failing: String },

    /// A jet file could not be parsed.
    #[error("jet file error: {0}")]
    JetFile(String),
}
