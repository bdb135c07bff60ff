//! Taylor-series integrator for the shooting systems.
//!
//! The potentials are trigonometric polynomials, so their Taylor
//! coefficients at any point are available in closed form and the solution
//! series follow from a linear recurrence. The method is generic over the
//! scalar, which is what lets the shooting run in double-double.

use num_complex::Complex;

use super::MonodromyError;
use crate::dd::{cabs, cis, Real};
use crate::model::unit_powers;

type C<R> = Complex<R>;

fn czero<R: Real>() -> C<R> {
    Complex::new(R::zero(), R::zero())
}

/// Taylor coefficients of `sum_k c_k e^{2ikx}` about `x0` up to `order`.
fn series_at<R: Real>(terms: &[(i64, C<R>)], kmax: i64, x0: R, inv: &[R], out: &mut [C<R>]) {
    out.iter_mut().for_each(|z| *z = czero());
    if terms.is_empty() {
        return;
    }
    let powers = unit_powers(cis(x0 + x0), kmax);
    for &(k, c) in terms {
        let e = if k >= 0 {
            powers[k as usize]
        } else {
            powers[(-k) as usize].conj()
        };
        let ratio = C::new(R::zero(), R::from_i64(2 * k));
        let mut t = c * e;
        for (i, o) in out.iter_mut().enumerate() {
            *o += t;
            t = t * ratio * inv[i + 1];
        }
    }
}

fn conv_at<R: Real>(w: &[C<R>], s: &[C<R>], i: usize) -> C<R> {
    let mut acc = czero();
    for j in 0..=i {
        acc += w[j] * s[i - j];
    }
    acc
}

/// Largest step keeping the truncated tail below `tol * scale`.
fn step_from_tail(tail: [f64; 2], order: usize, tol: f64, scale: f64) -> f64 {
    let target = tol * scale;
    let mut h = f64::INFINITY;
    if tail[0] > 0.0 {
        h = h.min((target / tail[0]).powf(1.0 / (order - 1) as f64));
    }
    if tail[1] > 0.0 {
        h = h.min((target / tail[1]).powf(1.0 / order as f64));
    }
    0.7 * h
}

pub(crate) struct Setup<R: Real> {
    pub order: usize,
    pub tol: f64,
    inv: Vec<R>,
}

impl<R: Real> Setup<R> {
    pub fn new(order: usize, tol: f64) -> Self {
        let mut inv = vec![R::one(); order + 2];
        for (i, x) in inv.iter_mut().enumerate().skip(1) {
            *x = R::one() / R::from_i64(i as i64);
        }
        Self { order, tol, inv }
    }
}

/// Hill system: `y'' = (v - lambda) y` for `phi`, `psi` together with their
/// lambda-derivatives, which obey `z'' = (v - lambda) z - y`.
///
/// `y[j]`, `dy[j]` hold values and x-derivatives for `j` in
/// `phi, psi, d phi, d psi`.
pub(crate) fn hill<R: Real>(
    setup: &Setup<R>,
    terms: &[(i64, C<R>)],
    kmax: i64,
    lambda: C<R>,
    y: &mut [C<R>; 4],
    dy: &mut [C<R>; 4],
) -> Result<(), MonodromyError> {
    let p = setup.order;
    let inv = &setup.inv;
    let end = R::pi();
    let mut x = R::zero();
    let mut w = vec![czero::<R>(); p + 1];
    let mut s = vec![vec![czero::<R>(); p + 1]; 4];
    let mut steps = 0usize;
    while x < end {
        series_at(terms, kmax, x, inv, &mut w);
        for j in 0..4 {
            s[j][0] = y[j];
            s[j][1] = dy[j];
        }
        for i in 0..=p - 2 {
            let denom = inv[i + 1] * inv[i + 2];
            for j in 0..4 {
                let mut rhs = conv_at(&w, &s[j], i) - lambda * s[j][i];
                if j >= 2 {
                    rhs -= s[j - 2][i];
                }
                s[j][i + 2] = rhs * denom;
            }
        }
        let mut tail = [0.0f64; 2];
        let mut scale: f64 = 1.0;
        for sj in &s {
            tail[0] = tail[0].max(cabs(sj[p - 1]));
            tail[1] = tail[1].max(cabs(sj[p]));
            scale = scale.max(cabs(sj[0]));
        }
        let hmax = step_from_tail(tail, p, setup.tol, scale);
        let remaining = end - x;
        let h = if R::from_f64(hmax) >= remaining {
            remaining
        } else {
            R::from_f64(hmax)
        };
        if h.to_f64() <= 1e-12 {
            return Err(MonodromyError::StepUnderflow { x: x.to_f64() });
        }
        for j in 0..4 {
            let mut val = s[j][p];
            let mut der = s[j][p] * R::from_i64(p as i64);
            for i in (0..p).rev() {
                val = val * h + s[j][i];
                if i >= 1 {
                    der = der * h + s[j][i] * R::from_i64(i as i64);
                }
            }
            y[j] = val;
            dy[j] = der;
        }
        x += h;
        steps += 1;
        if steps > 100_000 {
            return Err(MonodromyError::StepUnderflow { x: x.to_f64() });
        }
    }
    Ok(())
}

/// Dirac system for the two columns of the transfer matrix and their
/// lambda-derivatives: `u1' = -i(lambda u1 - P u2)`,
/// `u2' = i(lambda u2 - Q u1)`.
///
/// `u` holds `(u1, u2)` of column 1, then column 2, then the four
/// derivatives in the same layout.
pub(crate) fn dirac<R: Real>(
    setup: &Setup<R>,
    p_terms: &[(i64, C<R>)],
    q_terms: &[(i64, C<R>)],
    kmax: i64,
    lambda: C<R>,
    u: &mut [C<R>; 8],
) -> Result<(), MonodromyError> {
    let p = setup.order;
    let inv = &setup.inv;
    let end = R::pi();
    let i_unit = C::new(R::zero(), R::one());
    let mut x = R::zero();
    let mut wp = vec![czero::<R>(); p + 1];
    let mut wq = vec![czero::<R>(); p + 1];
    let mut s = vec![vec![czero::<R>(); p + 1]; 8];
    let mut steps = 0usize;
    while x < end {
        series_at(p_terms, kmax, x, inv, &mut wp);
        series_at(q_terms, kmax, x, inv, &mut wq);
        for j in 0..8 {
            s[j][0] = u[j];
        }
        for i in 0..p {
            for col in 0..4 {
                // components (a, b) = (u1, u2) of one column
                let a = 2 * col;
                let b = a + 1;
                let mut d1 = -(i_unit * (lambda * s[a][i] - conv_at(&wp, &s[b], i)));
                let mut d2 = i_unit * (lambda * s[b][i] - conv_at(&wq, &s[a], i));
                if col >= 2 {
                    d1 -= i_unit * s[a - 4][i];
                    d2 += i_unit * s[b - 4][i];
                }
                s[a][i + 1] = d1 * inv[i + 1];
                s[b][i + 1] = d2 * inv[i + 1];
            }
        }
        let mut tail = [0.0f64; 2];
        let mut scale: f64 = 1.0;
        for sj in &s {
            tail[0] = tail[0].max(cabs(sj[p - 1]));
            tail[1] = tail[1].max(cabs(sj[p]));
            scale = scale.max(cabs(sj[0]));
        }
        let hmax = step_from_tail(tail, p, setup.tol, scale);
        let remaining = end - x;
        let h = if R::from_f64(hmax) >= remaining {
            remaining
        } else {
            R::from_f64(hmax)
        };
        if h.to_f64() <= 1e-12 {
            return Err(MonodromyError::StepUnderflow { x: x.to_f64() });
        }
        for j in 0..8 {
            let mut val = s[j][p];
            for i in (0..p).rev() {
                val = val * h + s[j][i];
            }
            u[j] = val;
        }
        x += h;
        steps += 1;
        if steps > 100_000 {
            return Err(MonodromyError::StepUnderflow { x: x.to_f64() });
        }
    }
    Ok(())
}
