//! Shooting backend: transfer matrices over one period, characteristic
//! functions for every boundary condition, and root finding.

mod rk;
pub mod roots;
mod taylor;

use nalgebra::Matrix2;
use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::{from_c64, to_c64, Real, DD};
use crate::model::{BoundaryCondition, OperatorKind, Potential};

pub use roots::{
    argument_count, free_quasi_roots, lowest_eigenvalues, solve_bc, solve_near, solve_tracked,
    RootReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonodromyError {
    #[error("integration step underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("boundary condition {bc} is not defined for the {kind:?} operator")]
    UnsupportedBc { kind: OperatorKind, bc: BoundaryCondition },
    #[error("index n = {n} is not valid for {bc}: {reason}")]
    BadIndex {
        n: i64,
        bc: BoundaryCondition,
        reason: &'static str,
    },
    #[error("Newton iteration did not converge after {iterations} steps (last iterate {last})")]
    NewtonFailed { iterations: usize, last: Complex64 },
    #[error("argument principle counts {found} roots in |z - {center}| < {radius}, expected {expected}")]
    CountMismatch {
        center: Complex64,
        radius: f64,
        found: i64,
        expected: usize,
    },
    #[error("continuation from the free operator stalled at s = {s}")]
    ContinuationStalled { s: f64 },
}

/// Working precision of the shooting integration.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precision {
    /// Adaptive Dormand–Prince 8(5,3) in `f64`.
    Double,
    /// Taylor-series integration in double-double.
    DoubleDouble,
}

impl Precision {
    pub fn default_tol(self) -> f64 {
        match self {
            Precision::Double => 1e-14,
            Precision::DoubleDouble => 1e-28,
        }
    }
}

/// Precision plus local error tolerance.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integration {
    pub precision: Precision,
    pub tol: f64,
}

impl Integration {
    pub fn new(precision: Precision, tol: f64) -> Result<Self, MonodromyError> {
        if !(tol > 0.0) {
            return Err(MonodromyError::BadTolerance(tol));
        }
        Ok(Self { precision, tol })
    }

    pub fn double() -> Self {
        Self {
            precision: Precision::Double,
            tol: Precision::Double.default_tol(),
        }
    }

    pub fn double_double() -> Self {
        Self {
            precision: Precision::DoubleDouble,
            tol: Precision::DoubleDouble.default_tol(),
        }
    }

    pub fn with_precision(precision: Precision) -> Self {
        Self {
            precision,
            tol: precision.default_tol(),
        }
    }
}

impl Default for Integration {
    fn default() -> Self {
        Self::double()
    }
}

/// Transfer matrix across `[0, pi]` and its lambda-derivative.
///
/// Hill: `m = [[phi, psi], [phi', psi']]` at `x = pi` with
/// `phi(0) = psi'(0) = 1`, `phi'(0) = psi(0) = 0`.
/// Dirac: the solution operator of `i diag(1, -1) y' + V y = lambda y`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FundamentalData {
    pub kind: OperatorKind,
    pub lambda: Complex64,
    pub m: Matrix2<Complex64>,
    pub dm: Matrix2<Complex64>,
}

impl FundamentalData {
    pub fn phi_end(&self) -> Complex64 {
        self.m[(0, 0)]
    }
    pub fn psi_end(&self) -> Complex64 {
        self.m[(0, 1)]
    }
    pub fn dphi_end(&self) -> Complex64 {
        self.m[(1, 0)]
    }
    pub fn dpsi_end(&self) -> Complex64 {
        self.m[(1, 1)]
    }

    /// Wronskian (Hill) or transfer determinant (Dirac); 1 for exact data.
    pub fn det(&self) -> Complex64 {
        self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[(0, 0)] + self.m[(1, 1)]
    }

    /// Characteristic function of `bc` and its lambda-derivative.
    ///
    /// The periodic family uses `det(M - rho I)` rather than `trace - 2 cos t`:
    /// near a close pair the entries of `M - rho I` are themselves small,
    /// so integration errors enter multiplied by small numbers.
    pub fn characteristic(&self, bc: BoundaryCondition) -> Result<(Complex64, Complex64), MonodromyError> {
        let (m, d) = (&self.m, &self.dm);
        if let Some(rho) = bc.canonical().multiplier() {
            let a = m[(0, 0)] - rho;
            let e = m[(1, 1)] - rho;
            let f = a * e - m[(0, 1)] * m[(1, 0)];
            let df = d[(0, 0)] * e + a * d[(1, 1)] - d[(0, 1)] * m[(1, 0)] - m[(0, 1)] * d[(1, 0)];
            return Ok((f, df));
        }
        match (self.kind, bc) {
            (OperatorKind::Hill, BoundaryCondition::Dirichlet) => Ok((m[(0, 1)], d[(0, 1)])),
            (OperatorKind::Hill, BoundaryCondition::Neumann) => Ok((m[(1, 0)], d[(1, 0)])),
            (OperatorKind::Dirac, BoundaryCondition::Dirichlet) => {
                // shoot from (1, 1) and require y1(pi) = y2(pi)
                let f = m[(0, 0)] + m[(0, 1)] - m[(1, 0)] - m[(1, 1)];
                let df = d[(0, 0)] + d[(0, 1)] - d[(1, 0)] - d[(1, 1)];
                Ok((f, df))
            }
            (kind, bc) => Err(MonodromyError::UnsupportedBc { kind, bc }),
        }
    }
}

fn integrate_generic<R: Real>(
    v: &Potential,
    lambda: Complex64,
    tol: f64,
    order: usize,
) -> Result<FundamentalData, MonodromyError> {
    let setup = taylor::Setup::<R>::new(order, tol);
    let lam: Complex<R> = from_c64(lambda);
    let one = Complex::new(R::one(), R::zero());
    let zero = Complex::new(R::zero(), R::zero());
    let to_terms = |s: &crate::model::FourierSeries| -> Vec<(i64, Complex<R>)> {
        s.iter().map(|(k, c)| (k, from_c64(c))).collect()
    };
    match v {
        Potential::Hill(h) => {
            let terms = to_terms(&h.v);
            let mut y = [one, zero, zero, zero];
            let mut dy = [zero, one, zero, zero];
            taylor::hill(&setup, &terms, h.v.max_exponent(), lam, &mut y, &mut dy)?;
            let c = |z| to_c64(z);
            Ok(FundamentalData {
                kind: OperatorKind::Hill,
                lambda,
                m: Matrix2::new(c(y[0]), c(y[1]), c(dy[0]), c(dy[1])),
                dm: Matrix2::new(c(y[2]), c(y[3]), c(dy[2]), c(dy[3])),
            })
        }
        Potential::Dirac(d) => {
            let pt = to_terms(&d.p);
            let qt = to_terms(&d.q);
            let mut u = [one, zero, zero, one, zero, zero, zero, zero];
            taylor::dirac(&setup, &pt, &qt, d.max_exponent(), lam, &mut u)?;
            let c = |z| to_c64(z);
            Ok(FundamentalData {
                kind: OperatorKind::Dirac,
                lambda,
                m: Matrix2::new(c(u[0]), c(u[2]), c(u[1]), c(u[3])),
                dm: Matrix2::new(c(u[4]), c(u[6]), c(u[5]), c(u[7])),
            })
        }
    }
}

fn integrate_rk(v: &Potential, lambda: Complex64, tol: f64) -> Result<FundamentalData, MonodromyError> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i_unit = Complex64::new(0.0, 1.0);
    let end = std::f64::consts::PI;
    match v {
        Potential::Hill(h) => {
            let dense = h.v.dense::<f64>();
            let rhs = |x: f64, s: &[Complex64; 8]| {
                let q = dense.eval(x) - lambda;
                [
                    s[1],
                    q * s[0],
                    s[3],
                    q * s[2],
                    s[5],
                    q * s[4] - s[0],
                    s[7],
                    q * s[6] - s[2],
                ]
            };
            let y0 = [one, zero, zero, one, zero, zero, zero, zero];
            let s = rk::integrate(rhs, 0.0, end, y0, tol)?;
            Ok(FundamentalData {
                kind: OperatorKind::Hill,
                lambda,
                m: Matrix2::new(s[0], s[2], s[1], s[3]),
                dm: Matrix2::new(s[4], s[6], s[5], s[7]),
            })
        }
        Potential::Dirac(d) => {
            let dp = d.p.dense::<f64>();
            let dq = d.q.dense::<f64>();
            let rhs = |x: f64, s: &[Complex64; 8]| {
                let (p, q) = (dp.eval(x), dq.eval(x));
                let f1 = |u1: Complex64, u2: Complex64| -i_unit * (lambda * u1 - p * u2);
                let f2 = |u1: Complex64, u2: Complex64| i_unit * (lambda * u2 - q * u1);
                [
                    f1(s[0], s[1]),
                    f2(s[0], s[1]),
                    f1(s[2], s[3]),
                    f2(s[2], s[3]),
                    f1(s[4], s[5]) - i_unit * s[0],
                    f2(s[4], s[5]) + i_unit * s[1],
                    f1(s[6], s[7]) - i_unit * s[2],
                    f2(s[6], s[7]) + i_unit * s[3],
                ]
            };
            let y0 = [one, zero, zero, one, zero, zero, zero, zero];
            let s = rk::integrate(rhs, 0.0, end, y0, tol)?;
            Ok(FundamentalData {
                kind: OperatorKind::Dirac,
                lambda,
                m: Matrix2::new(s[0], s[2], s[1], s[3]),
                dm: Matrix2::new(s[4], s[6], s[5], s[7]),
            })
        }
    }
}

/// Integrate the fundamental system and its variational system over
/// `[0, pi]`.
pub fn integrate_fundamental(
    v: &Potential,
    lambda: Complex64,
    integ: &Integration,
) -> Result<FundamentalData, MonodromyError> {
    if !(integ.tol > 0.0) {
        return Err(MonodromyError::BadTolerance(integ.tol));
    }
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(MonodromyError::NonFinite { x: 0.0 });
    }
    match integ.precision {
        Precision::Double => integrate_rk(v, lambda, integ.tol),
        Precision::DoubleDouble => integrate_generic::<DD>(v, lambda, integ.tol, 40),
    }
}

/// Taylor integration in plain `f64`; an independent cross-check of the
/// Runge–Kutta path.
pub fn integrate_fundamental_taylor_f64(
    v: &Potential,
    lambda: Complex64,
    tol: f64,
) -> Result<FundamentalData, MonodromyError> {
    integrate_generic::<f64>(v, lambda, tol, 24)
}

/// Hill discriminant `phi(pi) + psi'(pi)`, or the transfer-matrix trace for
/// Dirac.
pub fn discriminant(v: &Potential, lambda: Complex64, integ: &Integration) -> Result<Complex64, MonodromyError> {
    Ok(integrate_fundamental(v, lambda, integ)?.trace())
}

/// Characteristic function value and derivative at `lambda`.
pub fn characteristic(
    v: &Potential,
    bc: BoundaryCondition,
    lambda: Complex64,
    integ: &Integration,
) -> Result<(Complex64, Complex64), MonodromyError> {
    integrate_fundamental(v, lambda, integ)?.characteristic(bc)
}
