//! Complex numbers over MPFR floats.
//!
//! `rug` is built without its MPC backend here, so the handful of operations
//! the envelope formulas need are implemented directly on pairs of `Float`s.
//! Every result inherits the precision of its left operand.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl Cx {
    pub fn zero(prec: u32) -> Self {
        Cx { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Cx { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Cx { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_int(prec: u32, v: i64) -> Self {
        Cx { re: Float::with_val(prec, v), im: Float::new(prec) }
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        Cx { re, im }
    }

    /// Parses decimal strings such as those produced by [`Cx::to_strings`].
    pub fn parse(prec: u32, re: &str, im: &str) -> Option<Self> {
        let re = Float::parse(re).ok()?;
        let im = Float::parse(im).ok()?;
        Some(Cx { re: Float::with_val(prec, re), im: Float::with_val(prec, im) })
    }

    /// `2πi · t` — the imaginary period of the logarithm scaled by `t`.
    pub fn two_pi_i(prec: u32, t: f64) -> Self {
        let pi = Float::with_val(prec, Constant::Pi);
        Cx { re: Float::new(prec), im: pi * 2u32 * t }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Cx { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    /// Magnitude as `f64`; underflows to 0 and overflows to infinity.
    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    /// Natural log of the magnitude as `f64`; finite even where `abs_f64`
    /// would underflow. Returns `-inf` for zero.
    pub fn ln_abs_f64(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.abs().ln().to_f64()
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = Float::with_val(p, &self.im).sin_cos(Float::new(p));
        Cx { re: Float::with_val(p, &m * &c), im: m * s }
    }

    /// Principal branch of the logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec();
        let r = self.abs().ln();
        let a = Float::with_val(p, self.im.atan2_ref(&self.re));
        Cx { re: r, im: a }
    }

    pub fn conj(&self) -> Self {
        Cx { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        let d = self.norm_sqr();
        Cx {
            re: Float::with_val(p, &self.re / &d),
            im: Float::with_val(p, -&self.im) / d,
        }
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        Cx { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        let p = self.prec();
        Cx { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn scale_int(&self, s: i64) -> Self {
        let p = self.prec();
        Cx { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn div_int(&self, s: i64) -> Self {
        let p = self.prec();
        Cx { re: Float::with_val(p, &self.re / s), im: Float::with_val(p, &self.im / s) }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 { self.recip() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Cx::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc *= &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Decimal strings for the real and imaginary parts, `digits` significant digits.
    pub fn to_strings(&self, digits: usize) -> (String, String) {
        (
            self.re.to_string_radix(10, Some(digits)),
            self.im.to_string_radix(10, Some(digits)),
        )
    }

    /// Number of decimal digits carried by a precision in bits.
    pub fn decimal_digits(prec: u32) -> usize {
        (prec as f64 * std::f64::consts::LOG10_2).floor() as usize
    }
}

/// `|a − b| / max(|a|, |b|, floor)` as `f64`.
pub fn rel_diff(a: &Cx, b: &Cx, floor: f64) -> f64 {
    let p = a.prec().max(b.prec());
    let d = (a - b).abs();
    let mut s = a.abs();
    let sb = b.abs();
    if sb > s {
        s = sb;
    }
    let fl = Float::with_val(p, floor);
    if fl > s {
        s = fl;
    }
    (d / s).to_f64()
}

/// `10^e` as an MPFR float of the given precision.
pub fn pow10(prec: u32, e: i32) -> Float {
    Float::with_val(prec, 10).pow(e)
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.precision().unwrap_or(12);
        let (r, i) = self.to_strings(d);
        write!(f, "({} {} {}i)", r, if i.starts_with('-') { "-" } else { "+" }, i.trim_start_matches('-'))
    }
}

impl<'a> Add<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn add(self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl<'a> Sub<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn sub(self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl<'a> Mul<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        let p = self.prec();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        Cx { re: ac - bd, im: ad + bc }
    }
}

impl<'a> Div<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn div(self, o: &Cx) -> Cx {
        self * &o.recip()
    }
}

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        let p = self.prec();
        Cx { re: Float::with_val(p, -&self.re), im: Float::with_val(p, -&self.im) }
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx { re: -self.re, im: -self.im }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Cx> for Cx {
            type Output = Cx;
            fn $m(self, o: Cx) -> Cx {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Cx> for Cx {
            type Output = Cx;
            fn $m(self, o: &Cx) -> Cx {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Cx> for &'a Cx {
            type Output = Cx;
            fn $m(self, o: Cx) -> Cx {
                self.$m(&o)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl<'a> AddAssign<&'a Cx> for Cx {
    fn add_assign(&mut self, o: &Cx) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl AddAssign<Cx> for Cx {
    fn add_assign(&mut self, o: Cx) {
        *self += &o;
    }
}

impl<'a> SubAssign<&'a Cx> for Cx {
    fn sub_assign(&mut self, o: &Cx) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl SubAssign<Cx> for Cx {
    fn sub_assign(&mut self, o: Cx) {
        *self -= &o;
    }
}

impl<'a> MulAssign<&'a Cx> for Cx {
    fn mul_assign(&mut self, o: &Cx) {
        *self = &*self * o;
    }
}

impl MulAssign<Cx> for Cx {
    fn mul_assign(&mut self, o: Cx) {
        *self = &*self * &o;
    }
}

impl<'a> DivAssign<&'a Cx> for Cx {
    fn div_assign(&mut self, o: &Cx) {
        *self = &*self / o;
    }
}

impl DivAssign<Cx> for Cx {
    fn div_assign(&mut self, o: Cx) {
        *self = &*self / &o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    #[test]
    fn exp_ln_roundtrip() {
        let z = Cx::from_f64(P, 0.3, -1.2);
        let back = z.exp().ln();
        assert!(rel_diff(&z, &back, 1e-30) < 1e-70);
    }

    #[test]
    fn exp_of_two_pi_i_is_one() {
        let w = Cx::two_pi_i(P, 1.0).exp();
        assert!(rel_diff(&w, &Cx::one(P), 1e-30) < 1e-70);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Cx::from_f64(P, 1.5, 2.0);
        let b = Cx::from_f64(P, -0.25, 0.75);
        let c = &(&a * &b) / &b;
        assert!(rel_diff(&a, &c, 1e-30) < 1e-70);
    }

    #[test]
    fn integer_powers() {
        let a = Cx::from_f64(P, 0.5, 0.5);
        let a3 = &(&a * &a) * &a;
        assert!(rel_diff(&a.powi(3), &a3, 1e-30) < 1e-70);
        assert!(rel_diff(&a.powi(-2), &(&a * &a).recip(), 1e-30) < 1e-70);
        assert_eq!(a.powi(0), Cx::one(P));
    }

    #[test]
    fn string_roundtrip_keeps_precision() {
        let a = Cx::from_f64(P, 1.0, 0.0).scale_f64(1.0 / 3.0).exp();
        let (r, i) = a.to_strings(Cx::decimal_digits(P) + 2);
        let b = Cx::parse(P, &r, &i).unwrap();
        assert!(rel_diff(&a, &b, 1e-30) < 1e-74);
    }
}
