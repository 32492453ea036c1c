//! Analytic layer of the fractional Poisson process: survival and waiting-time
//! functions, counting probabilities by independent routes, renewal function,
//! generating function.
//!
//! A rate `λ` enters only through the operational scale `x = λ t^β`, so that
//! `Ψ(t) = E_β(-λ t^β)` and `p_n(t) = x^n/n! E_β^{(n)}(-x)`.

mod subord;

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laplace::{invert_talbot, InversionConfig};
use crate::quad::{tanh_sinh, CompensatedSum};
use crate::specfun::{
    gamma, ln_factorial, mittag_leffler, scaled_deriv, MlOrder, MlRoute, SeriesControl,
};
use crate::table::{fmt17, write_row};

use subord::SubordPair;

/// Default node count of the subordination quadrature.
pub const DEFAULT_QUAD_NODES: usize = 1024;
/// Hard cap on the length of a pmf vector.
pub const N_MAX_CAP: usize = 10_000;
/// Accuracy requested from the series routes for each `p_n`.
const PMF_TOL: f64 = 1e-14;
/// Series and subordination values are compared on this window.
const OVERLAP: std::ops::RangeInclusive<usize> = 30..=40;
const OVERLAP_TOL: f64 = 1e-7;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder {
            value: beta,
            reason: "fractional order must lie in (0, 1]",
        })
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "time must be finite and >= 0, got {t}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FppParams {
    beta: f64,
    rate: f64,
}

impl FppParams {
    pub fn new(beta: f64, rate: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("rate must be positive, got {rate}")));
        }
        Ok(FppParams { beta, rate })
    }

    /// Unit rate.
    pub fn standard(beta: f64) -> Result<Self> {
        Self::new(beta, 1.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `λ t^β`.
    pub fn operational_scale(&self, t: f64) -> f64 {
        self.rate * t.powf(self.beta)
    }

    fn is_poisson(&self) -> bool {
        self.beta == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalTriple {
    pub survival: f64,
    pub failure: f64,
    /// `+∞` at `t = 0` when `β < 1`.
    pub density: f64,
}

/// How a counting probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfRoute {
    /// Poisson closed form or the `t = 0` point mass.
    Closed,
    Series(MlRoute),
    Subordination,
    Transform,
}

impl PmfRoute {
    pub fn as_str(self) -> &'static str {
        match self {
            PmfRoute::Closed => "closed",
            PmfRoute::Series(MlRoute::Closed) => "closed",
            PmfRoute::Series(MlRoute::Series) => "series",
            PmfRoute::Series(MlRoute::SeriesDd) => "series-dd",
            PmfRoute::Series(MlRoute::Asymptotic) => "asymptotic",
            PmfRoute::Series(MlRoute::Spectral) => "spectral",
            PmfRoute::Subordination => "subordination",
            PmfRoute::Transform => "transform",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingPmf {
    pub t: f64,
    pub n_max: usize,
    /// `p_0 ..= p_{n_max}`.
    pub probs: Vec<f64>,
    pub routes: Vec<PmfRoute>,
    /// Mass beyond `n_max`, summed from the computed terms plus a geometric
    /// bound on the rest; not defined as `1 - Σ probs`.
    pub tail_mass: f64,
}

impl CountingPmf {
    /// `|Σ probs + tail_mass - 1|`.
    pub fn normalization_defect(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for &p in &self.probs {
            s.add(p);
        }
        s.add(self.tail_mass);
        (s.value() - 1.0).abs()
    }

    pub fn mean(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for (n, &p) in self.probs.iter().enumerate() {
            s.add(n as f64 * p);
        }
        s.value()
    }
}

/// `Ψ`, `Φ = 1 - Ψ` and `φ = -Ψ'` at `t`.
pub fn renewal_triple(params: FppParams, t: f64) -> Result<RenewalTriple> {
    check_t(t)?;
    let (beta, rate) = (params.beta, params.rate);
    if t == 0.0 {
        let density = if params.is_poisson() {
            rate
        } else {
            f64::INFINITY
        };
        return Ok(RenewalTriple {
            survival: 1.0,
            failure: 0.0,
            density,
        });
    }
    if params.is_poisson() {
        let survival = (-rate * t).exp();
        return Ok(RenewalTriple {
            survival,
            failure: -(-rate * t).exp_m1(),
            density: rate * survival,
        });
    }
    let x = params.operational_scale(t);
    let survival = mittag_leffler(MlOrder::new(beta)?, -x, &SeriesControl::default())?;
    // φ = λβ t^{β-1} E'(-x) = (β/t) · x E'(-x)
    let (g1, _) = scaled_deriv(beta, x, 1, PMF_TOL, &SeriesControl::default())?;
    Ok(RenewalTriple {
        survival,
        failure: 1.0 - survival,
        density: beta / t * g1,
    })
}

/// `p_n(t)` through the Mittag-Leffler derivative.
pub fn pmf(params: FppParams, t: f64, n: usize) -> Result<f64> {
    pmf_series(params, t, n).map(|(v, _)| v)
}

fn pmf_series(params: FppParams, t: f64, n: usize) -> Result<(f64, PmfRoute)> {
    check_t(t)?;
    if t == 0.0 {
        return Ok((if n == 0 { 1.0 } else { 0.0 }, PmfRoute::Closed));
    }
    let x = params.operational_scale(t);
    if params.is_poisson() {
        return Ok((poisson(x, n), PmfRoute::Closed));
    }
    let (v, route) = scaled_deriv(params.beta, x, n, PMF_TOL, &SeriesControl::default())?;
    Ok((v.clamp(0.0, 1.0), PmfRoute::Series(route)))
}

fn poisson(x: f64, n: usize) -> f64 {
    if n == 0 {
        (-x).exp()
    } else {
        (n as f64 * x.ln() - x - ln_factorial(n)).exp()
    }
}

/// `p_n(t)` through the subordination integral over the inverse stable
/// subordinator, by composite Gauss-Legendre quadrature with at least
/// `quad_nodes` nodes.
pub fn pmf_subord(params: FppParams, t: f64, n: usize, quad_nodes: usize) -> Result<f64> {
    check_t(t)?;
    if t == 0.0 {
        return Err(Error::domain("subordination route needs t > 0"));
    }
    let x = params.operational_scale(t);
    if params.is_poisson() {
        // the inverse subordinator degenerates to t_* = t
        return Ok(poisson(x, n));
    }
    SubordPair::new(params.beta, x, quad_nodes)?.pmf(n)
}

/// `p_n(t)` with the route that produced it: the series routes when they
/// meet their error estimate, the subordination integral otherwise.
pub fn pmf_routed(params: FppParams, t: f64, n: usize) -> Result<(f64, PmfRoute)> {
    match pmf_series(params, t, n) {
        Err(Error::NonConvergence { .. }) | Err(Error::Overflow(_)) => Ok((
            pmf_subord(params, t, n, DEFAULT_QUAD_NODES)?,
            PmfRoute::Subordination,
        )),
        r => r,
    }
}

/// `p_n(t)` by Talbot inversion of `λ^n s^{β-1} / (λ + s^β)^{n+1}`.
pub fn pmf_transform(params: FppParams, t: f64, n: usize, cfg: &InversionConfig) -> Result<f64> {
    check_t(t)?;
    if t == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let (beta, rate) = (params.beta, params.rate);
    let lam_n = rate.powi(n as i32);
    let image = move |s: Complex64| {
        let sb = s.powf(beta);
        lam_n * sb / s / (sb + rate).powi(n as i32 + 1)
    };
    invert_talbot(image, t, cfg)
}

/// Counting distribution at `t`, truncated where the tail drops below
/// `eps_tail`.
///
/// Each `p_n` comes from the series routes when they meet their own error
/// estimate and from the subordination integral otherwise; on the overlap
/// window both are computed and must agree.
pub fn pmf_vector(params: FppParams, t: f64, eps_tail: f64) -> Result<CountingPmf> {
    check_t(t)?;
    if !(eps_tail > 0.0) {
        return Err(Error::domain(format!(
            "eps_tail must be positive, got {eps_tail}"
        )));
    }
    if t == 0.0 {
        return Ok(CountingPmf {
            t,
            n_max: 0,
            probs: vec![1.0],
            routes: vec![PmfRoute::Closed],
            tail_mass: 0.0,
        });
    }
    let x = params.operational_scale(t);
    let mut subord: Option<SubordPair> = None;
    let mut subord_p = |n: usize| -> Result<f64> {
        if subord.is_none() {
            subord = Some(SubordPair::new(params.beta, x, DEFAULT_QUAD_NODES)?);
        }
        subord.as_ref().expect("initialized above").pmf(n)
    };
    // terms far past the bulk are computed until they are negligible against
    // both eps_tail and the normalization target
    let negligible = (1e-3 * eps_tail).min(1e-18);
    let mut probs = Vec::new();
    let mut routes = Vec::new();
    let remainder;
    let mut n = 0usize;
    loop {
        if n > N_MAX_CAP {
            return Err(Error::TailBudgetExceeded { cap: N_MAX_CAP });
        }
        let (p, route) = match pmf_series(params, t, n) {
            Ok(v) => v,
            Err(Error::NonConvergence { .. }) | Err(Error::Overflow(_)) => {
                (subord_p(n)?, PmfRoute::Subordination)
            }
            Err(e) => return Err(e),
        };
        if OVERLAP.contains(&n) && matches!(route, PmfRoute::Series(_)) && p > OVERLAP_TOL {
            let q = subord_p(n)?;
            if (p - q).abs() > OVERLAP_TOL {
                return Err(Error::RouteDisagreement { n, a: p, b: q });
            }
        }
        probs.push(p);
        routes.push(route);
        let prev = if n > 0 { probs[n - 1] } else { f64::INFINITY };
        if n as f64 > x && p < negligible && p <= prev {
            let r = p / prev;
            // geometric bound on what lies beyond; ratios only shrink past the mode
            remainder = if r < 1.0 {
                p * r / (1.0 - r)
            } else {
                p * (N_MAX_CAP - n) as f64
            };
            break;
        }
        n += 1;
    }
    // suffix sums locate the truncation point
    let mut suffix = vec![0.0; probs.len() + 1];
    suffix[probs.len()] = remainder;
    for k in (0..probs.len()).rev() {
        suffix[k] = suffix[k + 1] + probs[k];
    }
    let n_max = (0..probs.len())
        .find(|&k| suffix[k + 1] < eps_tail)
        .unwrap_or(probs.len() - 1);
    let tail_mass = suffix[n_max + 1];
    probs.truncate(n_max + 1);
    routes.truncate(n_max + 1);
    let out = CountingPmf {
        t,
        n_max,
        probs,
        routes,
        tail_mass,
    };
    let defect = out.normalization_defect();
    if defect > 1e-10 {
        return Err(Error::NonConvergence {
            what: "pmf normalization",
            tol: 1e-10,
            estimate: defect,
        });
    }
    Ok(out)
}

/// `m(t) = λ t^β / Γ(1+β)`.
pub fn renewal_function(params: FppParams, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(params.operational_scale(t) / gamma(1.0 + params.beta))
}

/// `|m(t) - ∫_0^t [1 + m(t - τ)] φ(τ) dτ|`.
pub fn renewal_equation_residual(params: FppParams, t: f64, quad_tol: f64) -> Result<f64> {
    check_t(t)?;
    if t == 0.0 {
        return Err(Error::domain("renewal equation residual needs t > 0"));
    }
    let mut failure: Option<Error> = None;
    let f = |tau: f64| -> f64 {
        let phi = match renewal_triple(params, tau) {
            Ok(r) => r.density,
            Err(e) => {
                failure.get_or_insert(e);
                return 0.0;
            }
        };
        let m = params.operational_scale(t - tau) / gamma(1.0 + params.beta);
        (1.0 + m) * phi
    };
    let est = tanh_sinh(f, 0.0, t, 0.5 * quad_tol, 0.0);
    if let Some(e) = failure {
        return Err(e);
    }
    if !(est.error <= quad_tol) {
        return Err(Error::QuadratureFailure {
            what: "renewal equation",
            tol: quad_tol,
            estimate: est.error,
        });
    }
    Ok((renewal_function(params, t)? - est.value).abs())
}

/// `E_β(-(1 - e^{-κ}) λ t^β)`, the generating function `Σ p_n e^{-nκ}`.
pub fn ll_pgf(params: FppParams, kappa: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if !(kappa >= 0.0) {
        return Err(Error::domain(format!("kappa must be >= 0, got {kappa}")));
    }
    let z = (-kappa).exp_m1() * params.operational_scale(t);
    mittag_leffler(MlOrder::new(params.beta)?, z, &SeriesControl::default())
}

/// `1/λ` for `β = 1`, `+∞` otherwise.
pub fn mean_waiting_time(params: FppParams) -> f64 {
    if params.is_poisson() {
        1.0 / params.rate
    } else {
        f64::INFINITY
    }
}

/// `Ψ(t) / [sin(βπ) Γ(β) / (π λ t^β)]`, tending to 1.
pub fn survival_tail_ratio(params: FppParams, t: f64) -> Result<f64> {
    if params.is_poisson() {
        return Err(Error::domain("tail ratio degenerates at beta = 1"));
    }
    check_t(t)?;
    if t == 0.0 {
        return Err(Error::domain("tail ratio needs t > 0"));
    }
    let beta = params.beta;
    let psi = renewal_triple(params, t)?.survival;
    let lead = (beta * PI).sin() * gamma(beta) / (PI * params.operational_scale(t));
    Ok(psi / lead)
}

/// Columns: beta, t, n, p_n, route.
pub fn write_pmf_csv<W: Write + ?Sized>(
    w: &mut W,
    beta: f64,
    tables: &[CountingPmf],
) -> io::Result<()> {
    write_row(w, &["beta", "t", "n", "p_n", "route"].map(String::from))?;
    for tab in tables {
        for (n, (&p, r)) in tab.probs.iter().zip(&tab.routes).enumerate() {
            write_row(
                w,
                &[
                    fmt17(beta),
                    fmt17(tab.t),
                    n.to_string(),
                    fmt17(p),
                    r.as_str().to_string(),
                ],
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalRow {
    pub beta: f64,
    pub t: f64,
    pub m_closed: f64,
    pub m_sum: f64,
    pub residual: f64,
}

/// Closed-form renewal function against `Σ n p_n`.
pub fn renewal_row(params: FppParams, t: f64) -> Result<RenewalRow> {
    let m_closed = renewal_function(params, t)?;
    let m_sum = pmf_vector(params, t, 1e-14)?.mean();
    Ok(RenewalRow {
        beta: params.beta,
        t,
        m_closed,
        m_sum,
        residual: (m_closed - m_sum).abs(),
    })
}

/// Columns: beta, t, m_closed, m_sum, residual.
pub fn write_renewal_csv<W: Write + ?Sized>(w: &mut W, rows: &[RenewalRow]) -> io::Result<()> {
    write_row(
        w,
        &["beta", "t", "m_closed", "m_sum", "residual"].map(String::from),
    )?;
    for r in rows {
        write_row(
            w,
            &[
                fmt17(r.beta),
                fmt17(r.t),
                fmt17(r.m_closed),
                fmt17(r.m_sum),
                fmt17(r.residual),
            ],
        )?;
    }
    Ok(())
}
