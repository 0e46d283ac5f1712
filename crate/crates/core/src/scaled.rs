//! Real numbers with a separate binary exponent, for products that leave the f64 range.

use std::ops::{Add, Mul};

const RESCALE: i32 = 512;

/// `mant * 2^exp`, kept with `|mant|` in `[2^-512, 2^512]` unless zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    mant: f64,
    exp: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mant: 0.0, exp: 0 };
    pub const ONE: Scaled = Scaled { mant: 1.0, exp: 0 };

    pub fn new(x: f64) -> Self {
        Scaled { mant: x, exp: 0 }.norm()
    }

    /// `2^e`
    pub fn pow2(e: i64) -> Self {
        Scaled { mant: 1.0, exp: e }
    }

    fn norm(mut self) -> Self {
        if self.mant == 0.0 || !self.mant.is_finite() {
            self.exp = 0;
            return self;
        }
        let (_, e) = frexp(self.mant);
        if e.abs() > RESCALE {
            self.mant = ldexp(self.mant, -e);
            self.exp += e as i64;
        }
        self
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    pub fn signum(self) -> f64 {
        if self.mant == 0.0 {
            0.0
        } else {
            self.mant.signum()
        }
    }

    /// Natural log of the absolute value.
    pub fn ln_abs(self) -> f64 {
        self.mant.abs().ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn log2_abs(self) -> f64 {
        self.mant.abs().log2() + self.exp as f64
    }

    /// Nearest f64, possibly 0 or inf.
    pub fn to_f64(self) -> f64 {
        if self.exp > i32::MAX as i64 {
            return self.mant.signum() * f64::INFINITY;
        }
        if self.exp < i32::MIN as i64 {
            return 0.0;
        }
        ldexp(self.mant, self.exp as i32)
    }

    pub fn powi(self, mut k: u64) -> Self {
        let mut base = self;
        let mut acc = Scaled::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled {
            mant: self.mant * o.mant,
            exp: self.exp + o.exp,
        }
        .norm()
    }
}

impl Mul<f64> for Scaled {
    type Output = Scaled;
    fn mul(self, o: f64) -> Scaled {
        Scaled {
            mant: self.mant * o,
            exp: self.exp,
        }
        .norm()
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, o: Scaled) -> Scaled {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let shift = lo.exp - hi.exp;
        let lo_m = if shift < -2000 {
            0.0
        } else {
            ldexp(lo.mant, shift as i32)
        };
        Scaled {
            mant: hi.mant + lo_m,
            exp: hi.exp,
        }
        .norm()
    }
}

impl std::iter::Sum for Scaled {
    fn sum<I: Iterator<Item = Scaled>>(iter: I) -> Scaled {
        iter.fold(Scaled::ZERO, |a, b| a + b)
    }
}

fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32;
    if e == 0 {
        // subnormal
        let (m, e2) = frexp(x * 2f64.powi(64));
        return (m, e2 - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e - 1022)
}

fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frexp_roundtrip() {
        for &x in &[1.0, 0.3, -7.5, 1e-300, 3e300, 5e-320] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m.abs()));
            assert_eq!(ldexp(m, e), x);
        }
    }

    #[test]
    fn deep_products() {
        let x = Scaled::new(0.5).powi(5000);
        assert_eq!(x.log2_abs(), -5000.0);
        assert_eq!(x.to_f64(), 0.0);
        let y = x * Scaled::pow2(4999);
        assert_eq!(y.to_f64(), 0.5);
    }

    #[test]
    fn sums_across_scales() {
        let a = Scaled::pow2(-3000);
        let b = Scaled::pow2(-3001);
        let s = a + b;
        assert!((s.log2_abs() - (-3000.0 + 1.5f64.log2())).abs() < 1e-14);
        let c = Scaled::new(1.0) + Scaled::pow2(-3000);
        assert_eq!(c.to_f64(), 1.0);
        assert_eq!((Scaled::new(2.0) + Scaled::new(-2.0)).to_f64(), 0.0);
    }
}
