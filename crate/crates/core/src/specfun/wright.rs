//! Wright functions, the M-Wright density and the extremal stable density.

use std::f64::consts::PI;

use super::ddouble::Dd;
use super::gamma::{ln_factorial, ln_gamma, rgamma, sin_pi};
use super::{check_fraction, SeriesControl, WrightParams};
use crate::error::{Error, Result};
use crate::quad::{tanh_sinh, CompensatedSum};

const EPS: f64 = f64::EPSILON;

/// `ln|1/Γ(x)|` and the sign of `1/Γ(x)`; `(-∞, 0)` at the poles.
fn ln_abs_rgamma(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (-ln_gamma(x), 1.0);
    }
    if x == x.trunc() {
        return (f64::NEG_INFINITY, 0.0);
    }
    let s = sin_pi(x);
    // 1/Γ(x) = sin(πx) Γ(1-x) / π
    (s.abs().ln() + ln_gamma(1.0 - x) - PI.ln(), s.signum())
}

/// `W_{λ,μ}(z) = Σ z^k / (k! Γ(λk+μ))`.
///
/// Terms at poles of `Γ(λk+μ)` vanish.
pub fn wright(params: WrightParams, z: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    if !z.is_finite() {
        return Err(Error::domain(format!("argument must be finite, got {z}")));
    }
    let (lambda, mu) = (params.lambda(), params.mu());
    if z == 0.0 {
        return Ok(rgamma(mu));
    }
    if lambda == 0.0 {
        return Ok(z.exp() * rgamma(mu));
    }
    let mut estimate = f64::INFINITY;
    // cancellation in the f64 sum is retried in double-double
    for series in [wright_series, wright_series_dd] {
        if let Some((v, err)) = series(lambda, mu, z, ctl.max_terms) {
            if err <= ctl.abs_tol * v.abs().max(1.0) {
                return Ok(v);
            }
            estimate = estimate.min(err);
        }
    }
    Err(Error::NonConvergence {
        what: "Wright series",
        tol: ctl.abs_tol,
        estimate,
    })
}

/// Series value and error estimate; `None` if the budget runs out.
fn wright_series(lambda: f64, mu: f64, z: f64, max_terms: usize) -> Option<(f64, f64)> {
    let lnz = z.abs().ln();
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut round = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..max_terms {
        let kf = k as f64;
        let (lr, sign) = ln_abs_rgamma(lambda * kf + mu);
        let lf = ln_factorial(k);
        let t = if sign == 0.0 {
            0.0
        } else {
            (kf * lnz - lf + lr).exp()
        };
        if !t.is_finite() {
            return None;
        }
        let signed = if z < 0.0 && k % 2 == 1 {
            -sign * t
        } else {
            sign * t
        };
        sum.add(signed);
        abs_sum += t;
        round += t * EPS * (4.0 + (kf * lnz).abs() + lf + lr.abs().min(1e300));
        // envelope ignoring isolated pole zeros
        let arg = lambda * kf + mu;
        let ln_env = if arg > 0.0 {
            -ln_gamma(arg)
        } else {
            ln_gamma(1.0 - arg) - PI.ln()
        };
        let env = (kf * lnz - lf + ln_env).exp().max(t);
        if k > 2 && env <= prev && env <= EPS * 1e-2 * abs_sum.max(f64::MIN_POSITIVE) {
            return Some((sum.value(), round + env));
        }
        prev = env;
    }
    None
}

/// The series in double-double; terms come from a running `z^k/k!` and
/// `1/Γ(λk+μ)` so no f64 logarithm limits them.
fn wright_series_dd(lambda: f64, mu: f64, z: f64, max_terms: usize) -> Option<(f64, f64)> {
    let zd = Dd::new(z);
    let mut pow = Dd::ONE;
    let mut sum = Dd::ZERO;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..max_terms {
        if k > 0 {
            pow = (pow * zd).div_f64(k as f64);
        }
        let arg = Dd::new(lambda).mul_f64(k as f64) + Dd::new(mu);
        let t = pow * arg.rgamma();
        let m = t.hi.abs();
        if !m.is_finite() || !pow.hi.is_finite() {
            return None;
        }
        sum = sum + t;
        abs_sum += m;
        let kf = k as f64;
        let a = lambda * kf + mu;
        let ln_env = if a > 0.0 {
            -ln_gamma(a)
        } else {
            ln_gamma(1.0 - a) - PI.ln()
        };
        let env = (kf * z.abs().ln() - ln_factorial(k) + ln_env).exp().max(m);
        if k > 2 && env <= prev && env <= 1e-33 * abs_sum {
            let v = sum.to_f64();
            return Some((v, 1e-30 * abs_sum + EPS * v.abs()));
        }
        prev = env;
    }
    None
}

/// `M_ν(x) = W_{-ν,1-ν}(-x)` on `x ≥ 0`.
///
/// The Taylor series serves `x ≤ 1`; beyond, a Zolotarev-type integral with
/// a positive integrand keeps full relative accuracy in the tail.
pub fn m_wright(nu: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    check_fraction("nu", nu)?;
    ctl.validate()?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "M-Wright argument must be finite and >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(rgamma(1.0 - nu));
    }
    if x <= 1.0 {
        if let Some((v, err)) = wright_series(-nu, 1.0 - nu, -x, ctl.max_terms) {
            if err <= ctl.abs_tol {
                return Ok(v);
            }
        }
    }
    let (ln_m, err) = ln_m_wright_integral(nu, x);
    if err > 1e-12 {
        return Err(Error::NonConvergence {
            what: "M-Wright integral",
            tol: 1e-12,
            estimate: err,
        });
    }
    Ok(ln_m.exp())
}

/// `A(0+) = (ν^ν (1-ν)^{1-ν})^{1/(1-ν)}`.
pub(crate) fn zolotarev_at_zero(nu: f64) -> f64 {
    ((nu * nu.ln() + (1.0 - nu) * (1.0 - nu).ln()) / (1.0 - nu)).exp()
}

/// `ln(sin u / u)` on `[0, π)`, without cancellation at small `u`.
fn ln_sinc(u: f64) -> f64 {
    if u < 0.1 {
        let u2 = u * u;
        -u2 * (1.0 / 6.0 + u2 * (1.0 / 180.0 + u2 * (1.0 / 2835.0 + u2 / 37800.0)))
    } else {
        let s = if u > 0.5 * PI {
            (PI - u).sin()
        } else {
            u.sin()
        };
        (s / u).ln()
    }
}

/// `ln A(φ) - ln A(0+)` for the Zolotarev function
/// `A(φ) = [sin(νφ)^ν sin((1-ν)φ)^{1-ν} / sin φ]^{1/(1-ν)}`, increasing on
/// (0, π). The `ln φ` parts cancel exactly, leaving sinc terms.
fn zolotarev_log_excess(nu: f64, phi: f64) -> f64 {
    (nu * ln_sinc(nu * phi) + (1.0 - nu) * ln_sinc((1.0 - nu) * phi) - ln_sinc(phi)) / (1.0 - nu)
}

/// `ln M_ν(x)` via
/// `M_ν(x) = x^{ν/(1-ν)} / ((1-ν)π) ∫_0^π A(φ) exp(-x^{1/(1-ν)} A(φ)) dφ`,
/// with the relative error estimate of the integral.
///
/// With `d = ln A - ln A(0+)` the log integrand is `g = d - c A(0+) (e^d - 1)`
/// up to a constant, maximal where `c A = 1`. As `ν → 1` that peak gets
/// arbitrarily narrow, so the quadrature is split there and trimmed where
/// `g` has fallen 60 below its maximum.
fn ln_m_wright_integral(nu: f64, x: f64) -> (f64, f64) {
    let a0 = zolotarev_at_zero(nu);
    // ln(c A(0+)) with c = x^{1/(1-ν)}; c alone over- or underflows as ν → 1
    let ln_ca0 = x.ln() / (1.0 - nu) + a0.ln();
    if ln_ca0 > 709.0 {
        // ln M < -c A(0+) + ln c, far below the smallest double
        return (f64::NEG_INFINITY, 0.0);
    }
    let ca0 = ln_ca0.exp();
    let g_of_d = |d: f64| {
        let e = ca0 * d.exp_m1();
        d - if e.is_finite() {
            e
        } else {
            (ln_ca0 + d).exp() - ca0
        }
    };
    let d_peak = (-ln_ca0).max(0.0);
    let g_peak = g_of_d(d_peak);
    let phi_peak = if d_peak > 0.0 {
        bisect(0.0, PI, |phi| zolotarev_log_excess(nu, phi) < d_peak)
    } else {
        0.0
    };
    let g = |phi: f64| g_of_d(zolotarev_log_excess(nu, phi)) - g_peak;
    let negligible = |phi: f64| !(g(phi) > -60.0);
    let lo = if phi_peak > 0.0 && negligible(0.0) {
        bisect(0.0, phi_peak, negligible)
    } else {
        0.0
    };
    let hi = bisect(phi_peak, PI, |phi| !negligible(phi));
    let f = |phi: f64| -> f64 {
        let v = g(phi).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let left = tanh_sinh(f, lo, phi_peak, 0.0, 1e-15);
    let right = tanh_sinh(f, phi_peak, hi, 0.0, 1e-15);
    let value = left.value + right.value;
    let ln_m =
        nu / (1.0 - nu) * x.ln() - ca0 + a0.ln() + g_peak - ((1.0 - nu) * PI).ln() + value.ln();
    (ln_m, (left.error + right.error) / value)
}

/// Boundary of a predicate that holds on `[a, t)` and fails on `(t, b]`,
/// to full double precision.
fn bisect(mut a: f64, mut b: f64, holds: impl Fn(f64) -> bool) -> f64 {
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return mid;
        }
        if holds(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
}

/// Leading saddle-point coefficients `(a(ν), b(ν))`.
pub fn m_wright_tail_coefficients(nu: f64) -> (f64, f64) {
    (1.0 / (2.0 * PI * (1.0 - nu)).sqrt(), (1.0 - nu) / nu)
}

/// Saddle-point approximation of `M_ν(x)` for large `x`:
/// `M_ν(t/ν) ~ a(ν) t^{(ν-1/2)/(1-ν)} exp(-b(ν) t^{1/(1-ν)})` with `t = νx`.
pub fn m_wright_tail(nu: f64, x: f64) -> f64 {
    let (a, b) = m_wright_tail_coefficients(nu);
    let t = nu * x;
    a * t.powf((nu - 0.5) / (1.0 - nu)) * (-b * t.powf(1.0 / (1.0 - nu))).exp()
}

/// Density of the extremal stable law with Laplace transform `exp(-s^β)`:
/// `β t^{-β-1} M_β(t^{-β})`.
pub fn stable_density(beta: f64, t: f64) -> Result<f64> {
    check_fraction("beta", beta)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "stable density needs t > 0, got {t}"
        )));
    }
    let x = t.powf(-beta);
    let pref = beta.ln() - (beta + 1.0) * t.ln();
    if x <= 1.0 {
        let m = m_wright(beta, x, &SeriesControl::default())?;
        return Ok(pref.exp() * m);
    }
    let (ln_m, err) = ln_m_wright_integral(beta, x);
    if err > 1e-12 {
        return Err(Error::NonConvergence {
            what: "stable density integral",
            tol: 1e-12,
            estimate: err,
        });
    }
    Ok((pref + ln_m).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_wright_half_is_gaussian() {
        let ctl = SeriesControl::default();
        for i in 0..=80 {
            let x = 0.1 * i as f64;
            let exact = (-x * x / 4.0).exp() / PI.sqrt();
            let v = m_wright(0.5, x, &ctl).unwrap();
            assert!((v - exact).abs() < 1e-14, "x={x}: {v} vs {exact}");
        }
    }

    #[test]
    fn integral_and_series_meet_at_one() {
        for &nu in &[0.2, 0.5, 0.8] {
            let (v, _) = wright_series(-nu, 1.0 - nu, -1.0, 500).unwrap();
            let (l, _) = ln_m_wright_integral(nu, 1.0);
            assert!((v - l.exp()).abs() < 1e-13, "nu={nu}");
        }
    }

    #[test]
    fn zolotarev_is_increasing() {
        for &nu in &[0.1, 0.5, 0.9] {
            let mut prev = 0.0;
            for i in 1..100 {
                let d = zolotarev_log_excess(nu, PI * i as f64 / 100.0);
                assert!(d >= prev - 1e-14);
                prev = d;
            }
        }
    }

    #[test]
    fn levy_smirnov_density() {
        let exact = |t: f64| 0.5 / PI.sqrt() * t.powf(-1.5) * (-0.25 / t).exp();
        for &t in &[1e-3, 0.05, 0.3, 1.0, 7.0, 1e4] {
            let v = stable_density(0.5, t).unwrap();
            assert!(((v - exact(t)) / exact(t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn m_wright_keeps_its_mass_as_the_order_nears_one() {
        let ctl = SeriesControl::default();
        let nu = 0.9985;
        // the density lives on [0, 1.02]; Simpson resolves its right edge
        let n = 20_000;
        let h = 1.02 / n as f64;
        let (mut mass, mut mean) = (0.0, 0.0);
        for i in 0..=n {
            let y = i as f64 * h;
            let w = match i {
                0 => 1.0,
                i if i == n => 1.0,
                i if i % 2 == 1 => 4.0,
                _ => 2.0,
            };
            let m = m_wright(nu, y, &ctl).unwrap();
            assert!(m.is_finite() && m >= 0.0, "M({y}) = {m}");
            mass += w * m;
            mean += w * y * m;
        }
        assert!((mass * h / 3.0 - 1.0).abs() < 1e-10, "{}", mass * h / 3.0);
        assert!((mean * h / 3.0 - rgamma(1.0 + nu)).abs() < 1e-10);
        // x^{1/(1-ν)} overflows here; the value underflows
        assert_eq!(m_wright(nu, 2.9, &ctl).unwrap(), 0.0);
    }

    #[test]
    fn second_kind_on_the_cancelling_side() {
        // W_{-1/2,1/2}(z) = exp(-z²/4)/√π; for z > 0 the series alternates
        let p = WrightParams::new(-0.5, 0.5).unwrap();
        for &z in &[1.0, 3.0, 5.0] {
            let v = wright(p, z, &SeriesControl::default()).unwrap();
            let want = (-z * z / 4.0).exp() / PI.sqrt();
            assert!((v - want).abs() < 1e-14, "z={z}: {v} vs {want}");
        }
    }
}
