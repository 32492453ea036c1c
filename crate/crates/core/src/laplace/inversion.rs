//! Numerical Laplace inversion: fixed Talbot, a hyperbolic contour for images
//! that grow in the left half-plane, and Gaver-Stehfest on the real axis.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::InversionConfig;
use crate::error::{Error, Result};
use crate::specfun::{factorial, ln_factorial};

/// Absolute imaginary residue tolerated before the result counts as non-real.
const RESIDUE_TOL: f64 = 1e-10;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "inversion needs finite t > 0, got {t}"
        )))
    }
}

fn node_value<F: Fn(Complex64) -> Complex64>(image: &F, s: Complex64) -> Result<Complex64> {
    let v = image(s);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::ContourError { re: s.re, im: s.im })
    }
}

fn real_part(total: Complex64) -> Result<f64> {
    if total.im.abs() > RESIDUE_TOL * total.re.abs().max(1.0) {
        return Err(Error::NonRealResult { residue: total.im });
    }
    Ok(total.re)
}

/// Fixed-Talbot inversion on `s(θ) = rθ(cot θ + i)`, `r = 2M/(5t)`.
///
/// Both halves of the contour are summed explicitly, so an image that is not
/// conjugate-symmetric (a branch-cut violation) shows up as an imaginary
/// residue instead of being silently discarded.
pub fn invert_talbot<F: Fn(Complex64) -> Complex64>(
    image: F,
    t: f64,
    cfg: &InversionConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_t(t)?;
    let m = cfg.talbot_nodes;
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);
    let mut total = 0.5 * node_value(&image, Complex64::new(r, 0.0))? * (r * t).exp();
    let mut pos = Complex64::new(0.0, 0.0);
    let mut neg = Complex64::new(0.0, 0.0);
    for k in 1..m {
        let theta = k as f64 * PI / mf;
        let cot = 1.0 / theta.tan();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let w = Complex64::new(1.0, sigma);
        pos += (s * t).exp() * node_value(&image, s)? * w;
        neg += (s.conj() * t).exp() * node_value(&image, s.conj())? * w.conj();
    }
    total += 0.5 * (pos + neg);
    real_part(total * (r / mf))
}

/// Inversion on the hyperbola `s(u) = μ(1 + sin(iu - a))` with `a = 0.7`,
/// `μ = N/t`, `h = 2/N`.
///
/// The contour's asymptotes make an angle of 0.7 rad with the imaginary
/// axis, so images such as `E_ν(-s)` that grow like `exp((-s)^{1/ν})` near
/// the negative axis are never sampled there.
pub fn invert_hyperbolic<F: Fn(Complex64) -> Complex64>(
    image: F,
    t: f64,
    nodes: usize,
) -> Result<f64> {
    check_t(t)?;
    if nodes < 8 {
        return Err(Error::domain(format!(
            "hyperbolic contour needs >= 8 nodes, got {nodes}"
        )));
    }
    const A: f64 = 0.7;
    let nf = nodes as f64;
    let mu = nf / t;
    let h = 2.0 / nf;
    let n = nodes as i64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in -n..=n {
        let u = k as f64 * h;
        let z = Complex64::new(-A, u);
        let s = mu * (1.0 + z.sin());
        let ds = Complex64::new(0.0, mu) * z.cos();
        total += (s * t).exp() * node_value(&image, s)? * ds;
    }
    // h/(2πi) Σ ...
    real_part(total * Complex64::new(0.0, -h / (2.0 * PI)))
}

/// Gaver-Stehfest weights `V_k`, `k = 1..=N`.
fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    (1..=n)
        .map(|k| {
            let lo = k.div_ceil(2);
            let hi = k.min(half);
            let sum: f64 = (lo..=hi)
                .map(|j| {
                    let ln_num = half as f64 * (j as f64).ln() + ln_factorial(2 * j);
                    let ln_den = ln_factorial(half - j)
                        + ln_factorial(j)
                        + ln_factorial(j - 1)
                        + ln_factorial(k - j)
                        + ln_factorial(2 * j - k);
                    (ln_num - ln_den).exp()
                })
                .sum();
            let sign = if (k + half).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign * sum
        })
        .collect()
}

/// Gaver-Stehfest estimate from real samples `F(k ln 2 / t)`.
///
/// Ill-conditioned by design (weights reach ~4e9 at N = 16); useful only as
/// an independent vote next to a contour method.
pub fn invert_stehfest<F: Fn(f64) -> f64>(image: F, t: f64, cfg: &InversionConfig) -> Result<f64> {
    cfg.validate()?;
    check_t(t)?;
    let n = cfg.stehfest_terms;
    if factorial(n).is_infinite() {
        return Err(Error::Overflow("Stehfest weights"));
    }
    let a = std::f64::consts::LN_2 / t;
    let v: f64 = stehfest_weights(n)
        .iter()
        .enumerate()
        .map(|(i, w)| w * image(a * (i + 1) as f64))
        .sum();
    let out = a * v;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow("Stehfest sum"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> InversionConfig {
        InversionConfig::default()
    }

    #[test]
    fn talbot_elementary_images() {
        let one = Complex64::new(1.0, 0.0);
        assert!((invert_talbot(|s| one / s, 3.7, &cfg()).unwrap() - 1.0).abs() < 1e-10);
        assert!((invert_talbot(|s| one / (s * s), 2.0, &cfg()).unwrap() - 2.0).abs() < 1e-10);
        let v = invert_talbot(|s: Complex64| s.powf(-1.5), 1.0, &cfg()).unwrap();
        assert!((v - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-10);
    }

    #[test]
    fn talbot_flags_asymmetric_image() {
        let r = invert_talbot(|s: Complex64| Complex64::new(0.0, 1.0) / s, 1.0, &cfg());
        assert!(matches!(r, Err(Error::NonRealResult { .. })));
    }

    #[test]
    fn hyperbolic_matches_exponential() {
        for &t in &[0.3, 1.0, 4.0] {
            let v = invert_hyperbolic(|s| 1.0 / (s + 1.0), t, 24).unwrap();
            assert!((v - (-t).exp()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn stehfest_elementary_images() {
        assert!((invert_stehfest(|s| 1.0 / s, 1.0, &cfg()).unwrap() - 1.0).abs() < 1e-6);
        let v = invert_stehfest(|s| 1.0 / (1.0 + s), 1.0, &cfg()).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-6);
        let v = invert_stehfest(|s| s.powf(-0.5) / (1.0 + s.sqrt()), 1.0, &cfg()).unwrap();
        assert!((v - 0.427_583_576_155_807).abs() < 1e-4);
    }

    #[test]
    fn stehfest_weights_sum_to_zero() {
        // the weights annihilate constants in the k-sum: Σ V_k = 0
        let w = stehfest_weights(16);
        let big = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s: f64 = w.iter().sum();
        assert!(s.abs() < 1e-14 * big);
    }
}
