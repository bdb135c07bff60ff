//! Closed-form predictions `B_n^-`, `B_n^+` for the potential families, and
//! the gap, deviation and midpoint formulas built from them.
//!
//! Everything is assembled in log space ([`LogComplex`]) since the
//! predictions decay factorially in `n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logc::{ln_double_factorial, ln_factorial, ln_gamma, LogComplex};
use crate::model::{
    BetaProxy, DiracPotential, FourierSeries, HillPotential, OperatorKind, Potential,
};

/// Ratio tolerance for the pointwise cluster-point guards.
pub const GUARD_TOL: f64 = 1e-6;
/// Relative size below which `Re(sqrt_minus * sqrt_plus)` counts as zero.
const BRANCH_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("coefficients must be nonzero ({0})")]
    ZeroCoefficient(&'static str),
    #[error("invalid family parameter: {0}")]
    BadParameter(String),
    #[error("n = {n} is not in the admissible index set: {reason}")]
    Inadmissible { n: i64, reason: String },
    #[error("prediction inapplicable at n = {n}: {reason}")]
    Inapplicable { n: i64, reason: String },
}

type Result<T> = std::result::Result<T, AsymptoticsError>;

/// Potential families with closed-form asymptotics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilySpec {
    /// Hill, `v = a e^{-2ix} + b e^{2ix}`.
    TwoExpHill { a: Complex64, b: Complex64 },
    /// Hill, `v = a e^{-2Rix} + b e^{2Six}`, `R != S`.
    GenTwoExp {
        a: Complex64,
        b: Complex64,
        big_r: u32,
        big_s: u32,
    },
    /// Hill, `v = a e^{-2ix} + b e^{2six}`, `s > 2`.
    SExp { a: Complex64, b: Complex64, s: u32 },
    /// Hill, `v = a e^{-2ix} + b e^{2ix} + A e^{-4ix} + B e^{4ix}`.
    FourTerm {
        a: Complex64,
        b: Complex64,
        big_a: Complex64,
        big_b: Complex64,
    },
    /// Dirac, `P = a e^{-2ix} + A e^{2ix}`, `Q = b e^{-2ix} + B e^{2ix}`.
    DiracTwoExp {
        a: Complex64,
        big_a: Complex64,
        b: Complex64,
        big_b: Complex64,
    },
    /// Hill potential whose `m`-th derivative jumps by `jump` across the
    /// period seam, truncated to `|k| <= k_max`.
    SmoothJump { m: u32, jump: Complex64, k_max: u32 },
}

fn nonzero(z: Complex64, what: &'static str) -> Result<()> {
    if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(AsymptoticsError::ZeroCoefficient(what));
    }
    Ok(())
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `alpha, beta, tau, sigma` with `A = -alpha^2`, `a = -2 tau alpha`,
/// `B = -beta^2`, `b = -2 sigma beta`, principal square roots.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourTermParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub tau: Complex64,
    pub sigma: Complex64,
}

impl FamilySpec {
    pub fn two_exp(a: Complex64, b: Complex64) -> Result<Self> {
        nonzero(a, "a")?;
        nonzero(b, "b")?;
        Ok(FamilySpec::TwoExpHill { a, b })
    }

    pub fn gen_two_exp(a: Complex64, b: Complex64, big_r: u32, big_s: u32) -> Result<Self> {
        nonzero(a, "a")?;
        nonzero(b, "b")?;
        if big_r == 0 || big_s == 0 || big_r == big_s {
            return Err(AsymptoticsError::BadParameter(format!(
                "R and S must be distinct positive integers, got R = {big_r}, S = {big_s}"
            )));
        }
        Ok(FamilySpec::GenTwoExp { a, b, big_r, big_s })
    }

    pub fn s_exp(a: Complex64, b: Complex64, s: u32) -> Result<Self> {
        nonzero(a, "a")?;
        nonzero(b, "b")?;
        if s <= 2 {
            return Err(AsymptoticsError::BadParameter(format!("s must exceed 2, got {s}")));
        }
        Ok(FamilySpec::SExp { a, b, s })
    }

    pub fn four_term(a: Complex64, b: Complex64, big_a: Complex64, big_b: Complex64) -> Result<Self> {
        nonzero(a, "a")?;
        nonzero(b, "b")?;
        nonzero(big_a, "A")?;
        nonzero(big_b, "B")?;
        Ok(FamilySpec::FourTerm { a, b, big_a, big_b })
    }

    pub fn dirac_two_exp(a: Complex64, big_a: Complex64, b: Complex64, big_b: Complex64) -> Result<Self> {
        nonzero(a, "a")?;
        nonzero(big_a, "A")?;
        nonzero(b, "b")?;
        nonzero(big_b, "B")?;
        Ok(FamilySpec::DiracTwoExp { a, big_a, b, big_b })
    }

    pub fn smooth_jump(m: u32, jump: Complex64, k_max: u32) -> Result<Self> {
        if m > 2 {
            return Err(AsymptoticsError::BadParameter(format!("m = {m} unsupported (m <= 2)")));
        }
        if k_max < 4 {
            return Err(AsymptoticsError::BadParameter(format!("truncation K = {k_max} must be at least 4")));
        }
        Ok(FamilySpec::SmoothJump { m, jump, k_max })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::TwoExpHill { .. } => "two-exp",
            FamilySpec::GenTwoExp { .. } => "gen-two-exp",
            FamilySpec::SExp { .. } => "s-exp",
            FamilySpec::FourTerm { .. } => "four-term",
            FamilySpec::DiracTwoExp { .. } => "dirac-two-exp",
            FamilySpec::SmoothJump { .. } => "smooth-jump",
        }
    }

    pub fn kind(&self) -> OperatorKind {
        match self {
            FamilySpec::DiracTwoExp { .. } => OperatorKind::Dirac,
            _ => OperatorKind::Hill,
        }
    }

    /// `(d, r, s)` with `R = d r`, `S = d s`, `r` and `s` coprime.
    pub fn gen_two_exp_split(&self) -> Option<(u32, u32, u32)> {
        match *self {
            FamilySpec::GenTwoExp { big_r, big_s, .. } => {
                let d = gcd(big_r, big_s);
                Some((d, big_r / d, big_s / d))
            }
            _ => None,
        }
    }

    pub fn four_term_params(&self) -> Option<FourTermParams> {
        match *self {
            FamilySpec::FourTerm { a, b, big_a, big_b } => {
                let alpha = (-big_a).sqrt();
                let beta = (-big_b).sqrt();
                Some(FourTermParams {
                    alpha,
                    beta,
                    tau: -a / (2.0 * alpha),
                    sigma: -b / (2.0 * beta),
                })
            }
            _ => None,
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.potential().is_self_adjoint()
    }

    pub fn potential(&self) -> Potential {
        match *self {
            FamilySpec::TwoExpHill { a, b } => HillPotential::two_exp(a, b).into(),
            FamilySpec::GenTwoExp { a, b, big_r, big_s } => {
                HillPotential::from_terms([(-(big_r as i64), a), (big_s as i64, b)]).into()
            }
            FamilySpec::SExp { a, b, s } => HillPotential::from_terms([(-1, a), (s as i64, b)]).into(),
            FamilySpec::FourTerm { a, b, big_a, big_b } => {
                HillPotential::from_terms([(-1, a), (1, b), (-2, big_a), (2, big_b)]).into()
            }
            FamilySpec::DiracTwoExp { a, big_a, b, big_b } => {
                DiracPotential::two_exp(a, big_a, b, big_b).into()
            }
            FamilySpec::SmoothJump { m, jump, k_max } => {
                smooth_jump_series(m, jump, k_max).into()
            }
        }
    }

    /// Whether `n` belongs to the family's index set.
    pub fn check_index(&self, n: i64) -> Result<()> {
        let bad = |reason: String| Err(AsymptoticsError::Inadmissible { n, reason });
        match *self {
            FamilySpec::DiracTwoExp { .. } => Ok(()),
            _ if n < 1 => bad("Hill indices start at 1".into()),
            FamilySpec::GenTwoExp { .. } => {
                let (d, r, s) = self.gen_two_exp_split().unwrap();
                let step = (d * r * s) as i64;
                if n % step != 0 {
                    return bad(format!("n must be a multiple of r s d = {step}"));
                }
                Ok(())
            }
            FamilySpec::SExp { s, .. } => {
                if (n + 1) % s as i64 != 0 {
                    return bad(format!("n must be s m - 1 with s = {s}"));
                }
                Ok(())
            }
            FamilySpec::SmoothJump { k_max, .. } => {
                if n > k_max as i64 {
                    return bad(format!("n exceeds the truncation K = {k_max}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Admissible indices within `[lo, hi]`.
    pub fn admissible_in(&self, lo: i64, hi: i64) -> Vec<i64> {
        (lo..=hi).filter(|&n| self.check_index(n).is_ok()).collect()
    }
}

fn lc(z: Complex64) -> LogComplex {
    LogComplex::from_c64(z)
}

fn real(x: f64) -> LogComplex {
    LogComplex::from_real(x)
}

/// `4 (c / 4 k^2)^p / ((p-1)!)^2 * k^2` with `k = s d`: the shape shared by
/// the two-exponential families.
fn two_exp_term(c: Complex64, k2: f64, p: u64) -> LogComplex {
    real(4.0 * k2) * (lc(c) / real(4.0 * k2)).powi(p as i64) / LogComplex::from_ln(2.0 * ln_factorial(p - 1))
}

/// `(B^-, B^+)` for `fam` at index `n`, before branch resolution.
pub fn beta_values(fam: &FamilySpec, n: i64) -> Result<(LogComplex, LogComplex)> {
    fam.check_index(n)?;
    match *fam {
        FamilySpec::TwoExpHill { a, b } => {
            let p = n as u64;
            Ok((two_exp_term(a, 1.0, p), two_exp_term(b, 1.0, p)))
        }
        FamilySpec::GenTwoExp { a, b, .. } => {
            let (d, r, s) = fam.gen_two_exp_split().unwrap();
            let m = n as u64 / (d * r * s) as u64;
            let (d, r, s) = (d as f64, r as u64, s as u64);
            let bp = two_exp_term(b, (s as f64 * d).powi(2), r * m);
            let bm = two_exp_term(a, (r as f64 * d).powi(2), s * m);
            Ok((bm, bp))
        }
        FamilySpec::SExp { a, b, s } => {
            let m = (n + 1) / s as i64;
            let sf = s as f64;
            let ln_g = 2.0 * ln_gamma(1.0 - 1.0 / sf) + ln_gamma(m as f64 - 2.0 / sf)
                - 2.0 * ln_gamma(m as f64 - 1.0 / sf)
                - ln_gamma(1.0 - 2.0 / sf);
            // one step of e^{-2ix} together with m steps of e^{2six} reach
            // e^{2inx}, hence the single factor a
            let bp = real(-2.0 * sf) * lc(a) * lc(b).powi(m)
                / real(2.0 * sf).powi(2 * m)
                / LogComplex::from_ln(ln_factorial(m as u64))
                * LogComplex::from_ln(ln_g);
            let bm = lc(a).powi(n) / real(4.0).powi(n - 1) / LogComplex::from_ln(2.0 * ln_factorial(n as u64 - 1));
            Ok((bm, bp))
        }
        FamilySpec::FourTerm { .. } => {
            let FourTermParams { alpha, beta, tau, sigma } = fam.four_term_params().unwrap();
            let ln_df = 2.0 * ln_double_factorial(n - 2);
            let is_int = |z: Complex64, parity: i64| {
                let k = z.re.round();
                z.im.abs() < 1e-9 && (z.re - k).abs() < 1e-9 && (k as i64).rem_euclid(2) == parity
            };
            let i = Complex64::new(0.0, 1.0);
            if n % 2 == 0 {
                if is_int(tau, 1) || is_int(sigma, 1) {
                    return Err(AsymptoticsError::Inapplicable {
                        n,
                        reason: format!("tau = {tau} or sigma = {sigma} is an odd integer at even n"),
                    });
                }
                let f = |x: Complex64, y: Complex64| {
                    real(4.0) * lc(i * x / 2.0).powi(n) / LogComplex::from_ln(ln_df)
                        * lc((PI * y / 2.0).cos())
                };
                Ok((f(alpha, tau), f(beta, sigma)))
            } else {
                if is_int(tau, 0) || is_int(sigma, 0) {
                    return Err(AsymptoticsError::Inapplicable {
                        n,
                        reason: format!("tau = {tau} or sigma = {sigma} is an even integer at odd n"),
                    });
                }
                let f = |x: Complex64, y: Complex64| {
                    lc(4.0 * i) * lc(i * x / 2.0).powi(n) / LogComplex::from_ln(ln_df)
                        * real(2.0 / PI)
                        * lc((PI * y / 2.0).sin())
                };
                Ok((f(alpha, tau), f(beta, sigma)))
            }
        }
        FamilySpec::DiracTwoExp { a, big_a, b, big_b } => {
            if n.rem_euclid(2) == 0 {
                return Ok((LogComplex::ZERO, LogComplex::ZERO));
            }
            let m = (n.abs() - 1) / 2;
            let den = real(4.0).powi(2 * m) * LogComplex::from_ln(2.0 * ln_factorial(m as u64));
            let t = |x: Complex64, px: i64, y: Complex64, py: i64| lc(x).powi(px) * lc(y).powi(py) / den;
            if n > 0 {
                Ok((t(a, m + 1, b, m), t(big_a, m, big_b, m + 1)))
            } else {
                Ok((t(big_a, m + 1, big_b, m), t(a, m, b, m + 1)))
            }
        }
        FamilySpec::SmoothJump { m, jump, .. } => {
            let two_in = Complex64::new(0.0, 2.0 * n as f64);
            let bp = lc(jump) / real(PI) / lc(two_in).powi(m as i64 + 1);
            let bm = lc(jump) / real(PI) / lc(-two_in).powi(m as i64 + 1);
            Ok((bm, bp))
        }
    }
}

/// Principal square roots with `sqrt_minus` negated if needed so that
/// `Re(sqrt_minus * sqrt_plus) > 0`. A purely imaginary product is oriented
/// to `Im > 0` and reported as unresolved.
pub fn resolve_branch(b_minus: LogComplex, b_plus: LogComplex) -> (LogComplex, LogComplex, bool) {
    let mut sm = b_minus.sqrt();
    let sp = b_plus.sqrt();
    if sm.is_zero() || sp.is_zero() {
        return (sm, sp, true);
    }
    let arg = (sm * sp).arg;
    let c = arg.cos();
    if c.abs() <= BRANCH_TIE {
        if arg.sin() < 0.0 {
            sm = -sm;
        }
        return (sm, sp, false);
    }
    if c < 0.0 {
        sm = -sm;
    }
    (sm, sp, true)
}

pub fn resolve_branch_c64(b_minus: Complex64, b_plus: Complex64) -> (Complex64, Complex64, bool) {
    let (sm, sp, ok) = resolve_branch(lc(b_minus), lc(b_plus));
    (sm.to_c64(), sp.to_c64(), ok)
}

pub fn beta_proxy(fam: &FamilySpec, n: i64) -> Result<BetaProxy> {
    let (b_minus, b_plus) = beta_values(fam, n)?;
    let (sqrt_minus, sqrt_plus, resolved) = resolve_branch(b_minus, b_plus);
    Ok(BetaProxy {
        n,
        b_minus,
        b_plus,
        sqrt_minus,
        sqrt_plus,
        resolved,
    })
}

/// Predicted gap, deviations and midpoint deviation at one index.
///
/// Deviations: `dev_plus` is `mu - lambda^+`, `dev_minus` is
/// `mu - lambda^-`. A `None` marks a formula switched off by its guard.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub n: i64,
    pub kind: OperatorKind,
    pub beta: BetaProxy,
    pub gap_pred: LogComplex,
    pub dev_plus_pred: Option<LogComplex>,
    pub dev_minus_pred: Option<LogComplex>,
    pub midpoint_pred: Option<LogComplex>,
    /// False when the branch rule could not fix the sign; callers then
    /// match the sign against the measured gap.
    pub sign_resolved: bool,
    /// Set once the sign has been matched against a measurement.
    pub sign_flipped: bool,
    pub notes: Vec<String>,
}

fn near(z: Option<Complex64>, target: f64) -> bool {
    z.is_some_and(|z| (z - target).norm() <= GUARD_TOL)
}

impl PredictionRecord {
    pub fn from_proxy(kind: OperatorKind, beta: BetaProxy) -> Self {
        let (sm, sp) = (beta.sqrt_minus, beta.sqrt_plus);
        let gap = real(2.0) * sm * sp;
        let root_ratio = if sp.is_zero() { None } else { Some((sm / sp).to_c64()) };
        let beta_ratio = if beta.b_plus.is_zero() {
            None
        } else {
            Some((beta.b_minus / beta.b_plus).to_c64())
        };
        let half = real(0.5);
        let sum_sq = sp.add(sm).powi(2) * half;
        let diff_sq = sp.sub(sm).powi(2) * half;
        let mid = beta.b_plus.add(beta.b_minus) * half;
        let mut notes = Vec::new();
        let minus_one_hit = near(root_ratio, -1.0);
        let plus_one_hit = near(root_ratio, 1.0);
        if minus_one_hit {
            notes.push("sqrt(B-)/sqrt(B+) = -1: sum-type deviation withheld".to_string());
        }
        if plus_one_hit {
            notes.push("sqrt(B-)/sqrt(B+) = 1: difference-type deviation withheld".to_string());
        }
        let mid_ok = !near(beta_ratio, -1.0);
        if !mid_ok {
            notes.push("B-/B+ = -1: midpoint formula withheld".to_string());
        }
        let (dev_plus, dev_minus, midpoint) = match kind {
            OperatorKind::Hill => (
                (!minus_one_hit).then(|| -sum_sq),
                (!plus_one_hit).then(|| -diff_sq),
                mid_ok.then(|| -mid),
            ),
            OperatorKind::Dirac => (
                (!plus_one_hit).then_some(diff_sq),
                (!minus_one_hit).then_some(sum_sq),
                mid_ok.then_some(mid),
            ),
        };
        Self {
            n: beta.n,
            kind,
            beta,
            gap_pred: gap,
            dev_plus_pred: dev_plus,
            dev_minus_pred: dev_minus,
            midpoint_pred: midpoint,
            sign_resolved: beta.resolved,
            sign_flipped: false,
            notes,
        }
    }

    /// The same record with `sqrt(B^-)` negated: the gap changes sign and
    /// the two deviation formulas trade places.
    pub fn flipped(&self) -> Self {
        let mut beta = self.beta;
        beta.sqrt_minus = -beta.sqrt_minus;
        let mut out = Self::from_proxy(self.kind, beta);
        out.sign_resolved = self.sign_resolved;
        out.sign_flipped = !self.sign_flipped;
        out
    }

    pub fn gap_pred_c(&self) -> Complex64 {
        self.gap_pred.to_c64()
    }
    pub fn dev_plus_pred_c(&self) -> Option<Complex64> {
        self.dev_plus_pred.map(LogComplex::to_c64)
    }
    pub fn dev_minus_pred_c(&self) -> Option<Complex64> {
        self.dev_minus_pred.map(LogComplex::to_c64)
    }
    pub fn midpoint_pred_c(&self) -> Option<Complex64> {
        self.midpoint_pred.map(LogComplex::to_c64)
    }
}

pub fn predict(fam: &FamilySpec, n: i64) -> Result<PredictionRecord> {
    let beta = beta_proxy(fam, n)?;
    Ok(PredictionRecord::from_proxy(fam.kind(), beta))
}

/// Gap with the first correction for `a e^{-2ix} + b e^{2ix}`:
/// `8 (sqrt(ab)/4)^n / ((n-1)!)^2 (1 - ab/(4 n^3))`. The overall sign is
/// not determined; the principal root of `ab` is used.
pub fn predict_mathieu_refined(a: Complex64, b: Complex64, n: i64) -> Result<(Complex64, bool)> {
    if n < 1 {
        return Err(AsymptoticsError::Inadmissible {
            n,
            reason: "n >= 1 required".into(),
        });
    }
    let ab = a * b;
    let lead = real(8.0) * (lc(ab).sqrt() / real(4.0)).powi(n)
        / LogComplex::from_ln(2.0 * ln_factorial(n as u64 - 1));
    let corr = Complex64::new(1.0, 0.0) - ab / (4.0 * (n as f64).powi(3));
    Ok(((lead * lc(corr)).to_c64(), false))
}

/// Small-coupling gap for `2a cos 2x`: `8 (|a|/4)^n / ((n-1)!)^2`.
pub fn predict_levy_keller(a: Complex64, n: i64) -> Result<f64> {
    if n < 1 {
        return Err(AsymptoticsError::Inadmissible {
            n,
            reason: "n >= 1 required".into(),
        });
    }
    if a.norm() == 0.0 {
        return Ok(0.0);
    }
    let ln = 8f64.ln() + n as f64 * (a.norm() / 4.0).ln() - 2.0 * ln_factorial(n as u64 - 1);
    Ok(ln.exp())
}

fn smooth_jump_series(m: u32, jump: Complex64, k_max: u32) -> HillPotential {
    let k_max = k_max as i64;
    let terms = (-k_max..=k_max).filter(|&k| k != 0).map(|k| {
        let two_ik = Complex64::new(0.0, 2.0 * k as f64);
        (k, jump / PI / two_ik.powi(m as i32 + 1))
    });
    HillPotential::new(FourierSeries::new(terms))
}

/// Fourier truncation `|k| <= k_max` of the representative with
/// `v^{(m)}(0) - v^{(m)}(pi) = jump`: `v_k = jump / (pi (2ik)^{m+1})`,
/// `v_0 = 0`.
pub fn smooth_jump_potential(m: u32, jump: Complex64, k_max: u32) -> Result<HillPotential> {
    FamilySpec::smooth_jump(m, jump, k_max)?;
    Ok(smooth_jump_series(m, jump, k_max))
}
