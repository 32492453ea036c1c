//! Gamma function family on the real line.

use std::f64::consts::PI;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
// published digits kept verbatim
#[allow(clippy::excessive_precision)]
const LANCZOS_C: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Largest argument with finite Γ.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

/// `sin(πx)`, exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    if x == x.trunc() {
        return 0.0f64.copysign(x);
    }
    let mut y = x % 2.0;
    if y > 1.0 {
        y -= 2.0;
    } else if y < -1.0 {
        y += 2.0;
    }
    if y > 0.5 {
        (PI * (1.0 - y)).sin()
    } else if y < -0.5 {
        -(PI * (1.0 + y)).sin()
    } else {
        (PI * y).sin()
    }
}

/// `cos(πx)`, exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let mut y = x.abs() % 2.0;
    if y > 1.0 {
        y = 2.0 - y;
    }
    if y == 0.5 {
        0.0
    } else if y < 0.25 {
        (PI * y).cos()
    } else {
        sin_pi(0.5 - y)
    }
}

/// Lanczos sum for argument in [1, 2); returns Γ(x).
fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut a = LANCZOS_C[0];
    for (i, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    SQRT_2PI * t.powf(z + 0.5) * (-t).exp() * a
}

/// Γ(x) for real x; NaN at the poles.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.trunc() {
        return f64::NAN;
    }
    if x < 0.5 {
        // reflection
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    if x > GAMMA_MAX_ARG {
        return f64::INFINITY;
    }
    if x <= 64.0 {
        // shift into [1, 2) with exact-ish upward recursion
        if x < 1.0 {
            return lanczos(x + 1.0) / x;
        }
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.0 {
            y -= 1.0;
            prod *= y;
        }
        return lanczos(y) * prod;
    }
    // large argument: split the power to postpone overflow
    let z = x - 1.0;
    let mut a = LANCZOS_C[0];
    for (i, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (z + 0.5));
    SQRT_2PI * half * ((-t).exp() * half) * a
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x < 15.0 {
        return gamma(x).ln();
    }
    // Stirling series; seven correction terms reach machine precision for x ≥ 15
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv;
    for b in B {
        series += b * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

/// 1/Γ(x), zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.trunc() {
        return 0.0;
    }
    if x < 0.5 {
        let y = 1.0 - x;
        if y <= GAMMA_MAX_ARG {
            return sin_pi(x) * gamma(y) / PI;
        }
        let s = sin_pi(x);
        return s.signum() * (s.abs().ln() + ln_gamma(y) - PI.ln()).exp();
    }
    if x > GAMMA_MAX_ARG {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// ln(n!) for integer n.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else if n <= 170 {
        factorial(n).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// n! as f64 (∞ beyond 170).
pub fn factorial(n: usize) -> f64 {
    if n > 170 {
        return f64::INFINITY;
    }
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_at_half_is_sqrt_pi() {
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-15);
        assert!(rel(gamma(1.5), 0.5 * PI.sqrt()) < 1e-15);
    }

    #[test]
    fn gamma_at_integers_is_factorial() {
        for n in 1..=50usize {
            let expect = factorial(n - 1);
            assert!(rel(gamma(n as f64), expect) < 1e-14, "n={n}");
        }
    }

    #[test]
    fn rgamma_vanishes_at_poles() {
        for k in 0..20 {
            assert_eq!(rgamma(-(k as f64)), 0.0);
        }
        assert!(rel(rgamma(-0.5), -0.5 / PI.sqrt()) < 1e-14);
    }

    #[test]
    fn ln_gamma_continuous_across_branch() {
        let a = ln_gamma(15.0 - 1e-12);
        let b = ln_gamma(15.0);
        assert!((a - b).abs() < 1e-10);
        assert!(rel(ln_gamma(15.0), factorial(14).ln()) < 1e-15);
        assert!(rel(ln_gamma(100.0), 359.134_205_369_575_4) < 1e-15);
    }

    #[test]
    fn trig_pi_exact_points() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(cos_pi(2.5), 0.0);
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(1.25) + 0.5f64.sqrt()).abs() < 1e-15);
        assert!((cos_pi(1.0) + 1.0).abs() < 1e-16);
    }
}
