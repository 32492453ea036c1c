//! Special functions of fractional relaxation: Mittag-Leffler, Wright,
//! M-Wright and the extremal one-sided stable density.

mod ddouble;
mod gamma;
mod mittag_leffler;
mod wright;

pub use gamma::{cos_pi, factorial, gamma, ln_factorial, ln_gamma, rgamma, sin_pi, GAMMA_MAX_ARG};
pub use mittag_leffler::{
    mittag_leffler, mittag_leffler_complex, mittag_leffler_deriv, scaled_deriv, MlRoute,
};
pub use wright::{m_wright, m_wright_tail, m_wright_tail_coefficients, stable_density, wright};

use crate::error::{Error, Result};

/// Index α of the Mittag-Leffler function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlOrder(f64);

impl MlOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(MlOrder(alpha))
        } else {
            Err(Error::InvalidOrder {
                value: alpha,
                reason: "Mittag-Leffler index must be positive",
            })
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

/// Whether a Wright function is of the first (λ ≥ 0) or second kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WrightKind {
    First,
    Second,
}

/// Parameters (λ, μ) of the Wright function, λ > −1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrightParams {
    lambda: f64,
    mu: f64,
}

impl WrightParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > -1.0 && lambda.is_finite()) {
            return Err(Error::InvalidOrder {
                value: lambda,
                reason: "Wright parameter lambda must exceed -1",
            });
        }
        if !mu.is_finite() {
            return Err(Error::domain("Wright parameter mu must be finite"));
        }
        Ok(WrightParams { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kind(&self) -> WrightKind {
        if self.lambda >= 0.0 {
            WrightKind::First
        } else {
            WrightKind::Second
        }
    }
}

/// Accuracy and budget knobs for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub abs_tol: f64,
    pub max_terms: usize,
    /// |z| above which the large-argument routes are tried first.
    pub crossover_z: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            abs_tol: 1e-14,
            max_terms: 500,
            crossover_z: 5.0,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_terms == 0 || !(self.crossover_z > 0.0) {
            return Err(Error::domain(format!("invalid series control {self:?}")));
        }
        Ok(())
    }
}

pub(crate) fn check_fraction(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder {
            value: v,
            reason: match name {
                "nu" => "M-Wright index must lie in (0, 1)",
                _ => "stable index must lie in (0, 1)",
            },
        })
    }
}
