//! Forward Laplace transforms by quadrature, numerical inversion, and the
//! Laplace-Laplace Montroll-Weiss formulas of the counting process.

mod inversion;
mod pairs;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{exp_sinh, gauss_laguerre, tanh_sinh};

pub use inversion::{invert_hyperbolic, invert_stehfest, invert_talbot};
pub use pairs::{
    m_wright_pair, phi_pair, pmf_pair, psi_pair, registered_pairs, stretched_exp_pair, verify_pair,
    write_report_csv, Contour, PairReport, PairRow, TransformPair,
};

/// Laplace variables: `s` for time, `kappa` for the counting direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformPoint {
    pub s: Complex64,
    pub kappa: f64,
}

impl TransformPoint {
    pub fn new(s: Complex64, kappa: f64) -> Result<Self> {
        if !(s.re > 0.0) || !s.im.is_finite() || !s.re.is_finite() {
            return Err(Error::domain(format!(
                "Laplace variable needs Re(s) > 0, got {s}"
            )));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!(
                "kappa must be finite and >= 0, got {kappa}"
            )));
        }
        Ok(TransformPoint { s, kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub talbot_nodes: usize,
    /// Even.
    pub stehfest_terms: usize,
    /// Talbot/Stehfest disagreement above this flags a point.
    pub agreement_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            talbot_nodes: 32,
            stehfest_terms: 16,
            agreement_tol: 1e-6,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.talbot_nodes < 8 {
            return Err(Error::domain(format!(
                "talbot_nodes must be >= 8, got {}",
                self.talbot_nodes
            )));
        }
        if self.stehfest_terms < 8 || self.stehfest_terms % 2 == 1 {
            return Err(Error::domain(format!(
                "stehfest_terms must be even and >= 8, got {}",
                self.stehfest_terms
            )));
        }
        if !(self.agreement_tol > 0.0) {
            return Err(Error::domain("agreement_tol must be positive"));
        }
        Ok(())
    }
}

const LAGUERRE_ORDERS: [usize; 3] = [64, 128, 256];

/// `∫_0^∞ e^{-st} f(t) dt` for `Re(s) > 0`.
///
/// `[0, 1]` goes to tanh-sinh, which tolerates integrable endpoint
/// singularities; `[1, ∞)` to Gauss-Laguerre scaled by `Re(s)`, refined by
/// doubling the node count, with exp-sinh as the fallback for tails too slow
/// for a polynomial rule.
pub fn laplace_forward<F: Fn(f64) -> f64>(f: F, s: Complex64, quad_tol: f64) -> Result<Complex64> {
    if !(s.re > 0.0) || !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::domain(format!(
            "forward transform needs Re(s) > 0, got {s}"
        )));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::domain("quad_tol must be positive"));
    }
    let g = |t: f64| -> Complex64 {
        let v = f(t);
        if v == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (-s * t).exp() * v
        }
    };
    let head = tanh_sinh(g, 0.0, 1.0, 0.25 * quad_tol, 0.0);
    if !(head.value.re.is_finite() && head.value.im.is_finite()) || head.error > 0.5 * quad_tol {
        return Err(Error::QuadratureFailure {
            what: "forward Laplace transform on [0, 1]",
            tol: quad_tol,
            estimate: head.error,
        });
    }
    let tail_tol = 0.5 * quad_tol;
    let sigma = s.re;
    // ∫_1^∞ e^{-st} f = e^{-s}/σ ∫_0^∞ e^{-v} e^{-i Im(s) v/σ} f(1 + v/σ) dv
    let pref = (-s).exp() / sigma;
    let rot = Complex64::new(0.0, -s.im / sigma);
    let h = |v: f64| -> Complex64 { (rot * v).exp() * f(1.0 + v / sigma) };
    let mut prev: Option<Complex64> = None;
    let mut best_err = f64::INFINITY;
    for n in LAGUERRE_ORDERS {
        let v = pref * gauss_laguerre(n).integrate(&h);
        if let Some(p) = prev {
            let err = (v - p).norm();
            best_err = best_err.min(err);
            if err <= tail_tol && v.re.is_finite() && v.im.is_finite() {
                return Ok(head.value + v);
            }
        }
        prev = Some(v);
    }
    let tail = exp_sinh(g, 1.0, 0.5 * tail_tol, 0.0);
    if tail.error <= tail_tol && tail.value.re.is_finite() && tail.value.im.is_finite() {
        return Ok(head.value + tail.value);
    }
    Err(Error::QuadratureFailure {
        what: "forward Laplace transform on [1, inf)",
        tol: quad_tol,
        estimate: best_err.min(tail.error),
    })
}

/// `(1 - φ̃(s))/s · 1/(1 - φ̃(s) w̃(κ))`.
pub fn montroll_weiss_ll<P, W>(phi_img: P, w_img: W, p: TransformPoint) -> Result<Complex64>
where
    P: Fn(Complex64) -> Complex64,
    W: Fn(f64) -> f64,
{
    let phi = phi_img(p.s);
    let w = w_img(p.kappa);
    let denom = Complex64::new(1.0, 0.0) - phi * w;
    if denom.norm() < 1e-14 {
        return Err(Error::SingularDenominator(denom.norm()));
    }
    Ok((Complex64::new(1.0, 0.0) - phi) / p.s / denom)
}

/// Closed form `s^{β-1} / (1 + s^β - e^{-κ})` of the counting process.
pub fn counting_ll(beta: f64, p: TransformPoint) -> Result<Complex64> {
    crate::process::check_beta(beta)?;
    let sb = p.s.powf(beta);
    let denom = Complex64::new(1.0, 0.0) + sb - (-p.kappa).exp();
    if denom.norm() < 1e-14 {
        return Err(Error::SingularDenominator(denom.norm()));
    }
    Ok(sb / p.s / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn forward_constant_and_exponential() {
        let v = laplace_forward(|_| 1.0, c(2.0), 1e-12).unwrap();
        assert!((v - c(0.5)).norm() < 1e-12);
        let s = Complex64::new(0.7, 1.3);
        let v = laplace_forward(|t| (-t).exp(), s, 1e-12).unwrap();
        assert!((v - 1.0 / (s + 1.0)).norm() < 1e-11);
    }

    #[test]
    fn forward_singular_origin() {
        // t^{-1/2} ÷ sqrt(π/s)
        let v = laplace_forward(|t| t.powf(-0.5), c(1.5), 1e-10).unwrap();
        assert!((v.re - (std::f64::consts::PI / 1.5).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn counting_closed_form_matches_montroll_weiss() {
        let beta = 0.5;
        let p = TransformPoint::new(c(1.0), 1.0).unwrap();
        let cl = counting_ll(beta, p).unwrap();
        assert!((cl.re - 1.0 / (2.0 - (-1.0f64).exp())).abs() < 1e-15);
        let mw = montroll_weiss_ll(
            |s: Complex64| 1.0 / (1.0 + s.powf(beta)),
            |k: f64| (-k).exp(),
            p,
        )
        .unwrap();
        assert!((cl - mw).norm() < 1e-13);
    }

    #[test]
    fn montroll_weiss_total_probability() {
        let p = TransformPoint::new(Complex64::new(2.0, 0.5), 0.0).unwrap();
        let v =
            montroll_weiss_ll(|s: Complex64| 1.0 / (1.0 + s * s), |k: f64| (-k).exp(), p).unwrap();
        assert!((v - 1.0 / p.s).norm() < 1e-15);
    }

    #[test]
    fn singular_corner_is_reported() {
        let p = TransformPoint::new(c(1e-300), 0.0).unwrap();
        assert!(matches!(
            montroll_weiss_ll(|_| c(1.0), |_| 1.0, p),
            Err(Error::SingularDenominator(_))
        ));
    }
}
