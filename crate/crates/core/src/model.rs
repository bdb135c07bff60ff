//! Domain types shared by both spectral backends.
//!
//! Potentials are finite Fourier sums over the exponentials `e^{2ikx}` on
//! `[0, pi]`. The Hill operator is `-y'' + v y`; the Dirac operator is
//! `i diag(1, -1) y' + [[0, P], [Q, 0]] y`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::dd::{cis, from_c64, Real};
use crate::logc::LogComplex;

/// Fourier coefficients `k -> c_k` of `sum_k c_k e^{2ikx}`; zero entries are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    coeffs: BTreeMap<i64, Complex64>,
}

impl FourierSeries {
    pub fn new<I: IntoIterator<Item = (i64, Complex64)>>(terms: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in terms {
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|k|` with a nonzero coefficient (0 for the zero series).
    pub fn max_exponent(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn map<F: Fn(i64, Complex64) -> Complex64>(&self, f: F) -> Self {
        Self::new(self.iter().map(|(k, c)| (k, f(k, c))))
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|_, c| c * s)
    }

    /// `c_{-k} = conj(c_k)` for all k, i.e. the function is real valued.
    pub fn is_real_valued(&self) -> bool {
        self.iter().all(|(k, c)| self.coeff(-k) == c.conj())
    }

    /// Evaluate at real `x`.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, 2.0 * k as f64 * x))
            .sum()
    }

    pub(crate) fn dense<R: Real>(&self) -> DenseSeries<R> {
        DenseSeries::new(self)
    }
}

/// A Fourier series laid out for fast repeated evaluation in precision `R`.
#[derive(Clone, Debug)]
pub(crate) struct DenseSeries<R: Real> {
    /// `(k, c_k)` with `c_k` in working precision.
    pub terms: Vec<(i64, Complex<R>)>,
    pub kmax: i64,
}

impl<R: Real> DenseSeries<R> {
    fn new(s: &FourierSeries) -> Self {
        Self {
            terms: s.iter().map(|(k, c)| (k, from_c64(c))).collect(),
            kmax: s.max_exponent(),
        }
    }

    pub fn eval(&self, x: R) -> Complex<R> {
        if self.terms.is_empty() {
            return Complex::new(R::zero(), R::zero());
        }
        let unit = cis(x + x);
        let mut acc = Complex::new(R::zero(), R::zero());
        let powers = unit_powers(unit, self.kmax);
        for &(k, c) in &self.terms {
            let p = if k >= 0 {
                powers[k as usize]
            } else {
                powers[(-k) as usize].conj()
            };
            acc = acc + c * p;
        }
        acc
    }
}

/// `[1, u, u^2, ..., u^kmax]` for a unit-modulus `u`.
pub(crate) fn unit_powers<R: Real>(u: Complex<R>, kmax: i64) -> Vec<Complex<R>> {
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut p = Complex::new(R::one(), R::zero());
    out.push(p);
    for _ in 0..kmax {
        p = p * u;
        out.push(p);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HillPotential {
    pub v: FourierSeries,
}

impl HillPotential {
    pub fn new(v: FourierSeries) -> Self {
        Self { v }
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Complex64)>>(terms: I) -> Self {
        Self::new(FourierSeries::new(terms))
    }

    pub fn zero() -> Self {
        Self::new(FourierSeries::zero())
    }

    /// `a e^{-2ix} + b e^{2ix}`.
    pub fn two_exp(a: Complex64, b: Complex64) -> Self {
        Self::from_terms([(-1, a), (1, b)])
    }

    /// `2a cos 2x`.
    pub fn mathieu(a: f64) -> Self {
        Self::two_exp(Complex64::new(a, 0.0), Complex64::new(a, 0.0))
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.v.is_real_valued()
    }

    pub fn max_exponent(&self) -> i64 {
        self.v.max_exponent()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracPotential {
    pub p: FourierSeries,
    pub q: FourierSeries,
}

impl DiracPotential {
    pub fn new(p: FourierSeries, q: FourierSeries) -> Self {
        Self { p, q }
    }

    pub fn zero() -> Self {
        Self::new(FourierSeries::zero(), FourierSeries::zero())
    }

    /// `P = a e^{-2ix} + A e^{2ix}`, `Q = b e^{-2ix} + B e^{2ix}`.
    pub fn two_exp(a: Complex64, big_a: Complex64, b: Complex64, big_b: Complex64) -> Self {
        Self::new(
            FourierSeries::new([(-1, a), (1, big_a)]),
            FourierSeries::new([(-1, b), (1, big_b)]),
        )
    }

    /// `Q = conj(P)`, i.e. `q_k = conj(p_{-k})`.
    pub fn is_self_adjoint(&self) -> bool {
        let keys: std::collections::BTreeSet<i64> = self
            .p
            .iter()
            .map(|(k, _)| -k)
            .chain(self.q.iter().map(|(k, _)| k))
            .collect();
        keys.into_iter()
            .all(|k| self.q.coeff(k) == self.p.coeff(-k).conj())
    }

    pub fn max_exponent(&self) -> i64 {
        self.p.max_exponent().max(self.q.max_exponent())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    Hill,
    Dirac,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    Hill(HillPotential),
    Dirac(DiracPotential),
}

impl Potential {
    pub fn kind(&self) -> OperatorKind {
        match self {
            Potential::Hill(_) => OperatorKind::Hill,
            Potential::Dirac(_) => OperatorKind::Dirac,
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        match self {
            Potential::Hill(h) => h.is_self_adjoint(),
            Potential::Dirac(d) => d.is_self_adjoint(),
        }
    }

    pub fn max_exponent(&self) -> i64 {
        match self {
            Potential::Hill(h) => h.max_exponent(),
            Potential::Dirac(d) => d.max_exponent(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Hill(h) => h.v.is_zero(),
            Potential::Dirac(d) => d.p.is_zero() && d.q.is_zero(),
        }
    }

    /// `s * v`, used for continuation from the free operator.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Potential::Hill(h) => Potential::Hill(HillPotential::new(h.v.scaled(s))),
            Potential::Dirac(d) => {
                Potential::Dirac(DiracPotential::new(d.p.scaled(s), d.q.scaled(s)))
            }
        }
    }
}

impl From<HillPotential> for Potential {
    fn from(h: HillPotential) -> Self {
        Potential::Hill(h)
    }
}

impl From<DiracPotential> for Potential {
    fn from(d: DiracPotential) -> Self {
        Potential::Dirac(d)
    }
}

impl OperatorKind {
    /// Unperturbed location of the n-th eigenvalue cluster.
    pub fn lambda0(self, n: i64) -> f64 {
        match self {
            OperatorKind::Hill => (n * n) as f64,
            OperatorKind::Dirac => n as f64,
        }
    }

    /// Radius of the disc that holds the n-th cluster for large |n|.
    pub fn disc_radius(self, n: i64) -> f64 {
        match self {
            OperatorKind::Hill => n.abs() as f64 / 4.0,
            OperatorKind::Dirac => 0.5,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    PerPlus,
    PerMinus,
    Dirichlet,
    Neumann,
    /// `y(pi) = e^{it} y(0)` with `t` in `(-pi, pi]`.
    Quasi(f64),
}

impl BoundaryCondition {
    /// Quasi-periodic condition with `t` wrapped into `(-pi, pi]`.
    pub fn quasi(t: f64) -> Self {
        let mut t = t % (2.0 * PI);
        if t <= -PI {
            t += 2.0 * PI;
        } else if t > PI {
            t -= 2.0 * PI;
        }
        BoundaryCondition::Quasi(t)
    }

    /// Per+ for even n, Per- for odd n.
    pub fn periodic_for(n: i64) -> Self {
        if n.rem_euclid(2) == 0 {
            BoundaryCondition::PerPlus
        } else {
            BoundaryCondition::PerMinus
        }
    }

    /// Floquet multiplier `e^{it}` for the periodic family, `None` otherwise.
    pub fn multiplier(self) -> Option<Complex64> {
        match self {
            BoundaryCondition::PerPlus => Some(Complex64::new(1.0, 0.0)),
            BoundaryCondition::PerMinus => Some(Complex64::new(-1.0, 0.0)),
            BoundaryCondition::Quasi(t) => Some(Complex64::from_polar(1.0, t)),
            _ => None,
        }
    }

    /// Quasi(0) and Quasi(pi) collapse onto Per+ and Per-.
    pub fn canonical(self) -> Self {
        match self {
            BoundaryCondition::Quasi(t) if t == 0.0 => BoundaryCondition::PerPlus,
            BoundaryCondition::Quasi(t) if t == PI || t == -PI => BoundaryCondition::PerMinus,
            other => other,
        }
    }

    pub fn is_periodic_family(self) -> bool {
        self.multiplier().is_some()
    }

    /// Eigenvalues expected inside a localization disc.
    pub fn cluster_size(self) -> usize {
        match self {
            BoundaryCondition::Dirichlet | BoundaryCondition::Neumann => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::PerPlus => write!(f, "per+"),
            BoundaryCondition::PerMinus => write!(f, "per-"),
            BoundaryCondition::Dirichlet => write!(f, "dir"),
            BoundaryCondition::Neumann => write!(f, "neu"),
            BoundaryCondition::Quasi(t) => write!(f, "quasi:{t}"),
        }
    }
}

/// `v(x + zeta)` for complex `zeta`: each `c_k` becomes `c_k e^{2ik zeta}`.
pub fn shift_series(s: &FourierSeries, zeta: Complex64) -> FourierSeries {
    s.map(|k, c| c * (Complex64::new(0.0, 2.0 * k as f64) * zeta).exp())
}

pub fn shift_potential(p: &Potential, zeta: Complex64) -> Potential {
    match p {
        Potential::Hill(h) => Potential::Hill(HillPotential::new(shift_series(&h.v, zeta))),
        Potential::Dirac(d) => Potential::Dirac(DiracPotential::new(
            shift_series(&d.p, zeta),
            shift_series(&d.q, zeta),
        )),
    }
}

/// Order a pair so that the second element has the larger real part, or the
/// larger imaginary part when the real parts tie.
pub fn label_pair(e1: Complex64, e2: Complex64) -> (Complex64, Complex64) {
    let e2_is_plus = e2.re > e1.re || (e2.re == e1.re && e2.im >= e1.im);
    if e2_is_plus {
        (e1, e2)
    } else {
        (e2, e1)
    }
}

/// Periodic pair, Dirichlet eigenvalue and optional Neumann eigenvalue near
/// `lambda0`, with the derived gap and deviations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralTriangle {
    pub n: i64,
    pub kind: OperatorKind,
    pub lambda0: f64,
    pub lambda_minus: Complex64,
    pub lambda_plus: Complex64,
    pub mu: Complex64,
    pub nu: Option<Complex64>,
    pub gap: Complex64,
    pub deviation_plus: Complex64,
    pub deviation_minus: Complex64,
    pub midpoint_dev: Complex64,
    pub z_star: Complex64,
}

impl SpectralTriangle {
    pub fn new(
        n: i64,
        kind: OperatorKind,
        pair: (Complex64, Complex64),
        mu: Complex64,
        nu: Option<Complex64>,
    ) -> Self {
        let (lambda_minus, lambda_plus) = label_pair(pair.0, pair.1);
        let lambda0 = kind.lambda0(n);
        let gap = lambda_plus - lambda_minus;
        Self {
            n,
            kind,
            lambda0,
            lambda_minus,
            lambda_plus,
            mu,
            nu,
            gap,
            deviation_plus: mu - lambda_plus,
            deviation_minus: mu - lambda_minus,
            midpoint_dev: mu - 0.5 * (lambda_minus + lambda_plus),
            z_star: 0.5 * (lambda_plus + lambda_minus) - lambda0,
        }
    }

    pub fn z_plus(&self) -> Complex64 {
        self.lambda_plus - self.lambda0
    }

    pub fn z_minus(&self) -> Complex64 {
        self.lambda_minus - self.lambda0
    }
}

/// Closed-form stand-ins `B_n^-`, `B_n^+` for the off-diagonal functionals,
/// with square roots already branch-resolved.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaProxy {
    pub n: i64,
    pub b_minus: LogComplex,
    pub b_plus: LogComplex,
    pub sqrt_minus: LogComplex,
    pub sqrt_plus: LogComplex,
    /// False when `Re(sqrt_minus * sqrt_plus) = 0` and the sign had to be
    /// picked by convention.
    pub resolved: bool,
}

impl BetaProxy {
    pub fn b_minus_c(&self) -> Complex64 {
        self.b_minus.to_c64()
    }
    pub fn b_plus_c(&self) -> Complex64 {
        self.b_plus.to_c64()
    }
    pub fn sqrt_minus_c(&self) -> Complex64 {
        self.sqrt_minus.to_c64()
    }
    pub fn sqrt_plus_c(&self) -> Complex64 {
        self.sqrt_plus.to_c64()
    }

    pub fn is_zero(&self) -> bool {
        self.b_minus.is_zero() && self.b_plus.is_zero()
    }

    /// `|B^-| + |B^+|`.
    pub fn abs_sum(&self) -> f64 {
        self.b_minus.abs() + self.b_plus.abs()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: i64,
    /// `None` when both proxies vanish; `f64::INFINITY` when exactly one does.
    pub t_n: Option<f64>,
    /// `None` when the gap is zero.
    pub r_n: Option<f64>,
}
