//! Complex numbers held as `(ln|z|, arg z)`.
//!
//! Predicted gaps decay factorially, so closed forms are assembled in log
//! space and only exponentiated on output. Zero is `ln_abs = -inf`.

use std::f64::consts::PI;
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub ln_abs: f64,
    /// Argument normalized into (-pi, pi].
    pub arg: f64,
}

fn wrap(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

impl LogComplex {
    pub const ZERO: Self = Self {
        ln_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };
    pub const ONE: Self = Self {
        ln_abs: 0.0,
        arg: 0.0,
    };

    pub fn new(ln_abs: f64, arg: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            ln_abs,
            arg: wrap(arg),
        }
    }

    pub fn from_c64(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self::new(z.norm().ln(), z.arg())
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }

    /// A positive real given by its logarithm.
    pub fn from_ln(ln_abs: f64) -> Self {
        Self::new(ln_abs, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn to_c64(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.ln_abs.exp(), self.arg)
    }

    pub fn abs(self) -> f64 {
        self.ln_abs.exp()
    }

    pub fn powi(self, n: i64) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::ONE } else { Self::ZERO };
        }
        Self::new(self.ln_abs * n as f64, self.arg * n as f64)
    }

    /// Real power of the modulus with the argument scaled the same way
    /// (principal branch).
    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.ln_abs * p, self.arg * p)
    }

    /// Principal square root, `arg` in (-pi/2, pi/2].
    pub fn sqrt(self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self {
            ln_abs: 0.5 * self.ln_abs,
            arg: 0.5 * self.arg,
        }
    }

    pub fn recip(self) -> Self {
        Self::new(-self.ln_abs, -self.arg)
    }

    /// Sum of two values without leaving log space.
    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let m = self.ln_abs.max(other.ln_abs);
        let a = Complex64::from_polar((self.ln_abs - m).exp(), self.arg);
        let b = Complex64::from_polar((other.ln_abs - m).exp(), other.arg);
        let s = a + b;
        if s.norm() == 0.0 {
            return Self::ZERO;
        }
        Self::new(m + s.norm().ln(), s.arg())
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    pub fn scale(self, x: f64) -> Self {
        self * Self::from_real(x)
    }

    /// `|a/b|` computed in log space; `None` when `b` is zero.
    pub fn abs_ratio(self, other: Self) -> Option<f64> {
        if other.is_zero() {
            None
        } else {
            Some((self.ln_abs - other.ln_abs).exp())
        }
    }
}

impl Mul for LogComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.ln_abs + rhs.ln_abs, self.arg + rhs.arg)
    }
}

impl Div for LogComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for LogComplex {
    type Output = Self;
    fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self::new(self.ln_abs, self.arg + PI)
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// `ln(n!!)` with the conventions `0!! = (-1)!! = 1`.
pub fn ln_double_factorial(n: i64) -> f64 {
    let mut acc = 0.0;
    let mut k = n;
    while k > 1 {
        acc += (k as f64).ln();
        k -= 2;
    }
    acc
}

/// `ln Gamma(x)` for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}
