//! Double-double real arithmetic and the [`Real`] scalar abstraction used by
//! the shooting integrators.
//!
//! A [`DoubleDouble`] is the unevaluated sum `hi + lo` of two `f64` with
//! `|lo| <= ulp(hi) / 2`, giving roughly 31 significant decimal digits. The
//! error-free transformations follow Dekker and Knuth; products use a fused
//! multiply-add.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_complex::Complex;
use num_traits::{Num, One, Zero};

/// Scalar kinds the shooting backend can run in.
pub trait Real:
    Copy
    + fmt::Debug
    + Send
    + Sync
    + PartialOrd
    + Num
    + NumAssignOps
    + Neg<Output = Self>
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    /// Unit roundoff of the representation.
    fn epsilon() -> f64;
    fn pi() -> Self;

    fn from_i64(k: i64) -> Self {
        Self::from_f64(k as f64)
    }
}

/// Helper bound: the compound assignment operators.
pub trait NumAssignOps:
    AddAssign + SubAssign + MulAssign + DivAssign + RemAssign + Sized
{
}
impl<T: AddAssign + SubAssign + MulAssign + DivAssign + RemAssign> NumAssignOps for T {}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
}

#[derive(Copy, Clone, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

pub type DD = DoubleDouble;

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

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: 3.141592653589793,
        lo: 1.2246467991473532e-16,
    };
    const FRAC_PI_2: Self = Self {
        hi: 1.5707963267948966,
        lo: 6.123233995736766e-17,
    };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            // hi already integral: the fraction lives in lo
            let lo = self.lo.round();
            let (h, l) = quick_two_sum(hi, lo);
            Self::new(h, l)
        } else if (hi - self.hi).abs() == 0.5 {
            // exact half in hi; lo decides the direction
            if self.lo < 0.0 && hi > self.hi {
                Self::new(hi - 1.0, 0.0)
            } else if self.lo > 0.0 && hi < self.hi {
                Self::new(hi + 1.0, 0.0)
            } else {
                Self::new(hi, 0.0)
            }
        } else {
            Self::new(hi, 0.0)
        }
    }

    pub fn trunc(self) -> Self {
        let hi = self.hi.trunc();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.trunc());
            Self::new(h, l)
        } else {
            Self::new(hi, 0.0)
        }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    /// sin and cos of |r| <= pi/4 by Taylor series.
    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r * r;
        let mut sin = r;
        let mut cos = Self::ONE;
        let mut term_s = r;
        let mut term_c = Self::ONE;
        let mut k = 1.0f64;
        loop {
            term_c = -(term_c * r2) / Self::from_f64((2.0 * k - 1.0) * (2.0 * k));
            term_s = -(term_s * r2) / Self::from_f64((2.0 * k) * (2.0 * k + 1.0));
            cos += term_c;
            sin += term_s;
            if term_c.hi.abs() < 1e-34 && term_s.hi.abs() < 1e-34 {
                break;
            }
            k += 1.0;
            if k > 60.0 {
                break;
            }
        }
        (sin, cos)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DD({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs.mul_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self - (self / rhs).trunc() * rhs
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            // only decimal literals are meaningful here; force a parse error
            return "radix".parse::<f64>().map(Self::from);
        }
        s.parse::<f64>().map(Self::from)
    }
}

impl Real for DoubleDouble {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Self::from(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    #[inline]
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let x = Self::from(self.hi.sqrt());
        // one Newton step doubles the 53 correct bits
        x + (self - x * x) / (x.mul_f64(2.0))
    }
    fn sin_cos(self) -> (Self, Self) {
        if self.hi == 0.0 {
            return (Self::ZERO, Self::ONE);
        }
        let k = (self / Self::FRAC_PI_2).round();
        let r = self - k * Self::FRAC_PI_2;
        let (s, c) = Self::sin_cos_reduced(r);
        match (k.hi as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
    fn epsilon() -> f64 {
        // 2^-104
        4.930380657631324e-32
    }
    fn pi() -> Self {
        Self::PI
    }
}

/// Lossy conversion of a complex scalar to double precision.
pub fn to_c64<R: Real>(z: Complex<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<R: Real>(z: Complex<f64>) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

/// `|z|` evaluated in double precision; adequate for step-size control.
pub fn cabs<R: Real>(z: Complex<R>) -> f64 {
    to_c64(z).norm()
}

/// `e^{i theta}` at full precision of `R`.
pub fn cis<R: Real>(theta: R) -> Complex<R> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd_close(a: DD, b: DD, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol
    }

    #[test]
    fn arithmetic_beats_double() {
        let third = DD::ONE / DD::from(3.0);
        let back = third * DD::from(3.0);
        assert!(dd_close(back, DD::ONE, 1e-31));
        // (1 + 2^-60)^2 - 1 = 2^-59 + 2^-120
        let x = DD::from_sum(1.0, 2f64.powi(-60));
        let y = x * x - DD::ONE;
        assert!((y.to_f64() - 2f64.powi(-59)).abs() < 1e-33);
    }

    #[test]
    fn sqrt_two_squared() {
        let r = DD::from(2.0).sqrt();
        assert!(dd_close(r * r, DD::from(2.0), 1e-31));
        // mpmath: sqrt(2) = 1.41421356237309504880168872420969807856967187537694
        assert_eq!(r.hi, 1.4142135623730951);
        assert!((r.lo - (-9.667293313452913e-17)).abs() < 1e-31);
    }

    #[test]
    fn trig_identities_and_reference_values() {
        for &x in &[0.1, 1.0, 2.5, -3.3, 7.0, 40.0, 123.456] {
            let (s, c) = DD::from(x).sin_cos();
            assert!(dd_close(s * s + c * c, DD::ONE, 1e-30), "x = {x}");
            assert!((s.to_f64() - x.sin()).abs() < 1e-15);
            assert!((c.to_f64() - x.cos()).abs() < 1e-15);
        }
        // mpmath sin(1) = 0.841470984807896506652502321630298999622563060798371
        let (s, _) = DD::ONE.sin_cos();
        let reference = DD::new(0.8414709848078965, 1.776845092935536e-18);
        assert!(dd_close(s, reference, 5e-32), "{s:?}");
        // sin(pi) in double-double is the residual of the pi constant, ~1e-32
        let (s, c) = DD::PI.sin_cos();
        assert!(s.abs().to_f64() < 1e-31);
        assert!(dd_close(c, -DD::ONE, 1e-31));
    }

    #[test]
    fn ordering_and_rounding() {
        let a = DD::from_sum(1.0, 1e-20);
        let b = DD::from(1.0);
        assert!(a > b);
        assert_eq!(DD::from(2.5).round().hi, 3.0);
        assert_eq!(DD::from(-7.9).trunc().hi, -7.0);
        let r = DD::from(7.5) % DD::from(2.0);
        assert!(dd_close(r, DD::from(1.5), 1e-30));
    }

    #[test]
    fn complex_division_through_num_traits() {
        let z: Complex<DD> = Complex::new(DD::from(1.0), DD::from(2.0));
        let w: Complex<DD> = Complex::new(DD::from(3.0), DD::from(-1.0));
        let q = (z / w) * w;
        assert!(dd_close(q.re, z.re, 1e-30));
        assert!(dd_close(q.im, z.im, 1e-30));
    }
}
