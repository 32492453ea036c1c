//! Double-double arithmetic (~106-bit significand), just enough for the
//! cancellation-prone alternating Taylor series: `+ - × ÷`, `exp`, `ln`,
//! `ln Γ`, `1/Γ` and `sin πx`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};
const PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};
const HALF_LN_2PI: Dd = Dd {
    hi: 0.918_938_533_204_672_8,
    lo: -3.878_294_158_067_241_4e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[cfg(test)]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self - Dd::new(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Dd::new(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }

    fn ldexp(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        const SQUARINGS: i32 = 10;
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-SQUARINGS);
        // expm1 by Taylor; |r| < 3.4e-4 so 11 terms reach 2^-106
        let mut term = r;
        let mut s = r;
        for i in 2..=11 {
            term = (term * r).div_f64(i as f64);
            s = s + term;
        }
        for _ in 0..SQUARINGS {
            s = s.mul_f64(2.0) + s * s;
        }
        let e = (s + Dd::ONE).ldexp(k as i32);
        // ldexp can under/overflow at the ends of the range
        if e.hi.is_finite() {
            e
        } else {
            Dd::new(f64::INFINITY)
        }
    }

    /// Natural log: `y + ln(1 + u)` with `u = x e^{-y} - 1` and `y` the f64 log.
    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::new(f64::NAN);
        }
        let y = Dd::new(self.hi.ln());
        // |u| ≲ 1e-14, so ln(1 + u) = u - u²/2 to working precision
        let u = self * (-y).exp() - Dd::ONE;
        y + (u - (u * u).mul_f64(0.5))
    }

    /// `ln Γ(x)` for `x ≥ 1` (shifted Stirling series).
    pub fn ln_gamma(self) -> Dd {
        debug_assert!(self.hi >= 1.0);
        // B_{2k} / (2k (2k-1)) as exact numerator/denominator pairs
        const STIRLING: [(f64, f64); 14] = [
            (1.0, 12.0),
            (-1.0, 360.0),
            (1.0, 1260.0),
            (-1.0, 1680.0),
            (1.0, 1188.0),
            (-691.0, 360_360.0),
            (1.0, 156.0),
            (-3617.0, 122_400.0),
            (43_867.0, 244_188.0),
            (-174_611.0, 125_400.0),
            (77_683.0, 5_796.0),
            (-236_364_091.0, 1_506_960.0),
            (657_931.0, 300.0),
            (-3_392_780_147.0, 93_960.0),
        ];
        let mut x = self;
        let mut prod = Dd::ONE;
        while x.hi < 30.0 {
            prod = prod * x;
            x = x + Dd::ONE;
        }
        let inv = Dd::ONE / x;
        let inv2 = inv * inv;
        let mut p = inv;
        let mut series = Dd::ZERO;
        for (num, den) in STIRLING {
            series = series + p.mul_f64(num).div_f64(den);
            p = p * inv2;
        }
        let lx = x.ln();
        let base = (x - Dd::new(0.5)) * lx - x + HALF_LN_2PI + series;
        if prod.hi == 1.0 && prod.lo == 0.0 {
            base
        } else {
            base - prod.ln()
        }
    }
    /// `sin(πx)`, exact zero at integers.
    pub fn sin_pi(self) -> Dd {
        let n = self.hi.round();
        let r = self - Dd::new(n);
        if r.hi == 0.0 {
            return Dd::ZERO;
        }
        // |r| ≤ 1/2, so |πr| ≤ π/2 and 30 Taylor terms pass 2^-106
        let y = PI * r;
        let y2 = y * y;
        let mut term = y;
        let mut s = y;
        for i in 1..30 {
            term = -(term * y2).div_f64((2 * i * (2 * i + 1)) as f64);
            s = s + term;
        }
        if n.rem_euclid(2.0) == 1.0 {
            -s
        } else {
            s
        }
    }

    /// `1/Γ(x)`, zero at the poles.
    pub fn rgamma(self) -> Dd {
        if self.hi >= 1.0 {
            (-self.ln_gamma()).exp()
        } else if self.hi > 0.0 {
            // 1/Γ(x) = x/Γ(x+1)
            self * (-(self + Dd::ONE).ln_gamma()).exp()
        } else {
            // 1/Γ(x) = sin(πx) Γ(1-x) / π
            let s = self.sin_pi();
            if s.hi == 0.0 {
                return Dd::ZERO;
            }
            s * (Dd::ONE - self).ln_gamma().exp() / PI
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[1e-5, 0.3, 1.0, 2.5, 17.0, 123.456, -40.0] {
            let d = Dd::new(x);
            let back = d.exp().ln();
            assert!((back - d).abs().hi <= 1e-30 * x.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn exp_one_is_e() {
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let e = Dd::ONE.exp();
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-31);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        // ln(20!) with 20! = 2432902008176640000 exactly representable in dd
        let f = Dd::new(2_432_902_008_176_640_000.0).ln();
        let g = Dd::new(21.0).ln_gamma();
        assert!((f - g).abs().hi < 1e-29, "{:?} {:?}", f, g);
        // ln Γ(1) = ln Γ(2) = 0
        assert!(Dd::ONE.ln_gamma().abs().hi < 1e-29);
        assert!(Dd::new(2.0).ln_gamma().abs().hi < 1e-29);
    }

    #[test]
    fn sin_pi_identities() {
        // sin²(π/4) = 1/2; sin(π(x+1)) = -sin(πx)
        let q = Dd::new(0.25).sin_pi();
        assert!(((q * q).mul_f64(2.0) - Dd::ONE).abs().hi < 1e-30);
        let a = Dd::new(0.375).sin_pi();
        let b = Dd::new(1.375).sin_pi();
        assert!((a + b).abs().hi < 1e-30);
        assert_eq!(Dd::new(-3.0).sin_pi(), Dd::ZERO);
    }

    #[test]
    fn rgamma_across_branches() {
        // Γ(1/2)² = π and Γ(-1/2) = -2√π, so 1/Γ(-1/2) = -1/(2Γ(1/2))
        let h = Dd::new(0.5).rgamma();
        assert!(((h * h) * PI - Dd::ONE).abs().hi < 1e-30);
        let m = Dd::new(-0.5).rgamma();
        assert!((m.mul_f64(-2.0) - h).abs().hi < 1e-30);
        assert!(Dd::new(4.0).rgamma().mul_f64(6.0) - Dd::ONE < Dd::new(1e-30));
        assert_eq!(Dd::new(-2.0).rgamma(), Dd::ZERO);
    }
}
