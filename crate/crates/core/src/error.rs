use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Variants carry enough context to produce a single-line diagnostic; the
/// CLI maps `InvalidOrder`/`Domain` to usage errors and everything else to
/// numerical failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid order {value}: {reason}")]
    InvalidOrder { value: f64, reason: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge to {tol:e} (estimated error {estimate:e})")]
    NonConvergence {
        what: &'static str,
        tol: f64,
        estimate: f64,
    },

    #[error("overflow in {0}")]
    Overflow(&'static str),

    #[error("quadrature failure in {what}: error estimate {estimate:e} exceeds {tol:e}")]
    QuadratureFailure {
        what: &'static str,
        tol: f64,
        estimate: f64,
    },

    #[error("image function is not finite at contour node s = {re} + {im}i")]
    ContourError { re: f64, im: f64 },

    #[error("inversion produced imaginary residue {residue:e} (branch-cut violation?)")]
    NonRealResult { residue: f64 },

    #[error("singular denominator |1 - phi*w| = {0:e}")]
    SingularDenominator(f64),

    #[error("tail budget exceeded: n_max would exceed cap {cap}")]
    TailBudgetExceeded { cap: usize },

    #[error("path budget exceeded: more than {cap} events before the horizon")]
    PathBudgetExceeded { cap: usize },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("horizon mismatch: path horizon {horizon} < evaluation time {t}")]
    HorizonMismatch { horizon: f64, t: f64 },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("routes disagree at n = {n}: {a} vs {b}")]
    RouteDisagreement { n: usize, a: f64, b: f64 },

    #[error("at t = {t}: {source}")]
    AtGridPoint { t: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by invalid caller input rather than numerics.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::AtGridPoint { source, .. } => source.is_usage(),
            _ => matches!(
                self,
                Error::InvalidOrder { .. } | Error::Domain(_) | Error::HorizonMismatch { .. }
            ),
        }
    }
}
