//! Quadrature and summation kernels shared by the numerical modules.
//!
//! Double-exponential rules (tanh-sinh on finite intervals, exp-sinh on
//! half-lines) cope with the integrable endpoint singularities that the
//! fractional kernels produce; Gauss-Laguerre handles exponentially weighted
//! half-line integrals.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Values that can be integrated: real or complex.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

impl<T: Scalar> Estimate<T> {
    pub fn converged(&self, abs_tol: f64, rel_tol: f64) -> bool {
        self.value.is_finite_value() && self.error <= abs_tol.max(rel_tol * self.value.magnitude())
    }
}

const MAX_LEVEL: u32 = 9;
const MIN_LEVEL: u32 = 3;
const TAU_MAX: f64 = 6.0;

/// Tanh-sinh quadrature of `f` over `[a, b]`.
///
/// Nodes that round onto an endpoint are skipped, so `f` may be singular
/// there. The error estimate is the difference between successive levels.
pub fn tanh_sinh<T, F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Estimate<T>
where
    T: Scalar,
    F: FnMut(f64) -> T,
{
    let half = 0.5 * (b - a);
    if half == 0.0 {
        return Estimate {
            value: T::zero(),
            error: 0.0,
            evals: 0,
        };
    }
    let mut evals = 0usize;
    // weighted sample at abscissa tau; returns None once weights underflow
    let mut sample = |tau: f64, evals: &mut usize| -> Option<T> {
        let y = FRAC_PI_2 * tau.sinh();
        let cy = y.cosh();
        let w = half * FRAC_PI_2 * tau.cosh() / (cy * cy);
        if w == 0.0 || !w.is_finite() {
            return None;
        }
        // distance from the nearer endpoint, computed without cancellation
        let q = 2.0 / ((2.0 * y.abs()).exp() + 1.0);
        let x = if tau >= 0.0 {
            b - half * q
        } else {
            a + half * q
        };
        if x <= a || x >= b {
            return Some(T::zero());
        }
        *evals += 1;
        let v = f(x);
        if v.is_finite_value() {
            Some(v * w)
        } else if w < 1e-250 {
            Some(T::zero())
        } else {
            Some(v * w)
        }
    };

    let mut h = 1.0;
    let mut sum = sample(0.0, &mut evals).unwrap_or(T::zero());
    let mut k = 1.0;
    while k * h <= TAU_MAX {
        let tau = k * h;
        match (sample(tau, &mut evals), sample(-tau, &mut evals)) {
            (None, None) => break,
            (p, m) => sum = sum + p.unwrap_or(T::zero()) + m.unwrap_or(T::zero()),
        }
        k += 1.0;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1.0;
        while k * h <= TAU_MAX {
            let tau = k * h;
            match (sample(tau, &mut evals), sample(-tau, &mut evals)) {
                (None, None) => break,
                (p, m) => sum = sum + p.unwrap_or(T::zero()) + m.unwrap_or(T::zero()),
            }
            k += 2.0;
        }
        let next = sum * h;
        error = (next - estimate).magnitude();
        estimate = next;
        if level >= MIN_LEVEL && error <= abs_tol.max(rel_tol * estimate.magnitude()) {
            break;
        }
    }
    Estimate {
        value: estimate,
        error,
        evals,
    }
}

/// Exp-sinh quadrature of `f` over `[a, ∞)`.
///
/// Suited to integrands with algebraic or exponential decay and an
/// integrable singularity at `a`.
pub fn exp_sinh<T, F>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Estimate<T>
where
    T: Scalar,
    F: FnMut(f64) -> T,
{
    let mut evals = 0usize;
    let mut sample = |tau: f64, evals: &mut usize| -> Option<T> {
        let y = FRAC_PI_2 * tau.sinh();
        let ey = y.exp();
        if !ey.is_finite() {
            return None;
        }
        let w = FRAC_PI_2 * tau.cosh() * ey;
        if w == 0.0 {
            return None;
        }
        let x = a + ey;
        if x == a {
            return Some(T::zero());
        }
        *evals += 1;
        let v = f(x);
        if !v.is_finite_value() && w < 1e-250 {
            return Some(T::zero());
        }
        Some(v * w)
    };
    // level 0 fixes the active window on each side: stop once terms are
    // negligible or the integrand stops being finite
    let mut sum = sample(0.0, &mut evals).unwrap_or(T::zero());
    let mut limits = [0.0f64; 2];
    for (side, dir) in [(0usize, 1.0f64), (1, -1.0)] {
        let mut small = 0;
        let mut k = 1.0;
        while k <= TAU_MAX {
            let term = sample(dir * k, &mut evals).unwrap_or(T::zero());
            if !term.is_finite_value() {
                break;
            }
            limits[side] = k;
            sum = sum + term;
            if sum.magnitude() > 0.0 && term.magnitude() <= 1e-40 * sum.magnitude() {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
            k += 1.0;
        }
    }
    let mut h = 1.0;
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        for (side, dir) in [(0usize, 1.0f64), (1, -1.0)] {
            let mut k = 1.0;
            while k * h < limits[side] {
                let term = sample(dir * k * h, &mut evals).unwrap_or(T::zero());
                if term.is_finite_value() {
                    sum = sum + term;
                }
                k += 2.0;
            }
        }
        let next = sum * h;
        error = (next - estimate).magnitude();
        estimate = next;
        if level >= MIN_LEVEL && error <= abs_tol.max(rel_tol * estimate.magnitude()) {
            break;
        }
    }
    Estimate {
        value: estimate,
        error,
        evals,
    }
}

/// Gauss-Laguerre rule for `∫_0^∞ e^{-x} g(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `w_i e^{x_i}`, finite even where `w_i` underflows.
    pub scaled_weights: Vec<f64>,
}

/// `(L_n(z), L_{n-1}(z))` up to a common factor `e^{ln_scale}`.
fn laguerre_pair(n: usize, z: f64) -> (f64, f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    let mut ln_scale = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
        if p1.abs() > 1e150 {
            p1 *= 1e-150;
            p2 *= 1e-150;
            ln_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, p2, ln_scale)
}

/// `ln Σ_{k<n} L_k(z)^2`; the weights are its reciprocal at the nodes.
fn ln_christoffel(n: usize, z: f64) -> f64 {
    let mut p1 = 1.0f64;
    let mut p2 = 0.0f64;
    let mut sum = 1.0f64;
    let mut ln_scale = 0.0;
    for j in 1..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
        sum += p1 * p1;
        if sum > 1e200 {
            p1 *= 1e-100;
            p2 *= 1e-100;
            sum *= 1e-200;
            ln_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    sum.ln() + ln_scale
}

impl GaussLaguerre {
    pub const MAX_NODES: usize = 400;

    /// Nodes by Newton iteration on `L_n` with asymptotic starting guesses.
    pub fn new(n: usize) -> Self {
        assert!(
            (1..=Self::MAX_NODES).contains(&n),
            "Gauss-Laguerre order must be in 1..={}",
            Self::MAX_NODES
        );
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut scaled_weights = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            for _ in 0..100 {
                let (p1, p2, _) = laguerre_pair(n, z);
                // Newton step L_n / L_n' with L_n' = n (L_n - L_{n-1}) / z
                let step = p1 * z / (nf * (p1 - p2));
                z -= step;
                if step.abs() <= 4.0 * f64::EPSILON * z.abs() {
                    break;
                }
            }
            let ln_w = -ln_christoffel(n, z);
            nodes[i] = z;
            weights[i] = ln_w.exp();
            scaled_weights[i] = (ln_w + z).exp();
        }
        GaussLaguerre {
            nodes,
            weights,
            scaled_weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i g(x_i)`.
    pub fn integrate<T: Scalar, F: FnMut(f64) -> T>(&self, mut g: F) -> T {
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            acc = acc + g(x) * w;
        }
        acc
    }

    /// `∫_0^∞ h(x) dx ≈ Σ w_i e^{x_i} h(x_i)` for `h` without the exponential weight.
    pub fn integrate_unweighted<T: Scalar, F: FnMut(f64) -> T>(&self, mut h: F) -> T {
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.scaled_weights) {
            acc = acc + h(x) * w;
        }
        acc
    }
}

/// Shared Gauss-Laguerre rule of order `n`, built once per process.
pub fn gauss_laguerre(n: usize) -> Arc<GaussLaguerre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
        return Arc::clone(rule);
    }
    // built outside the lock; a racing duplicate is harmless
    let rule = Arc::new(GaussLaguerre::new(n));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    Arc::clone(map.entry(n).or_insert(rule))
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton
/// iteration on `P_n` from Chebyshev starting guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() <= 4.0 * f64::EPSILON {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m30 - 2.0 / 31.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let est = tanh_sinh(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-14, 1e-14);
        assert!((est.value - 2.0).abs() < 1e-12, "{:?}", est);
    }

    #[test]
    fn tanh_sinh_smooth_integrand() {
        let est = tanh_sinh(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-15, 1e-15);
        assert!((est.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exp_sinh_algebraic_tail() {
        // ∫_0^∞ dx / (1 + x)^{1.3} = 1 / 0.3
        let est = exp_sinh(|x: f64| (1.0 + x).powf(-1.3), 0.0, 1e-13, 1e-13);
        assert!((est.value - 1.0 / 0.3).abs() < 1e-10, "{:?}", est);
    }

    #[test]
    fn exp_sinh_exponential_tail() {
        let est = exp_sinh(|x: f64| (-x).exp() * x.powi(3), 0.0, 1e-15, 1e-15);
        assert!((est.value - 6.0).abs() < 1e-12);
    }

    #[test]
    fn laguerre_integrates_polynomials_exactly() {
        let rule = GaussLaguerre::new(20);
        // ∫ e^{-x} x^k dx = k!
        for (k, fact) in [
            (0, 1.0),
            (3, 6.0),
            (10, 3628800.0),
            (20, 2.43290200817664e18),
        ] {
            let v = rule.integrate(|x: f64| x.powi(k));
            assert!(((v - fact) / fact).abs() < 1e-12, "k={k} v={v}");
        }
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_large_order_is_stable() {
        let rule = GaussLaguerre::new(GaussLaguerre::MAX_NODES);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        let v = rule.integrate(|x: f64| (-x).exp());
        assert!((v - 0.5).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-16).abs() < 1e-30);
    }
}
