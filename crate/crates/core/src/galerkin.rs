//! Truncated Fourier-basis matrices and their eigenvalues.
//!
//! Hill Per±: exponentials `e^{ikx}` with `k` of the matching parity.
//! Hill Dirichlet/Neumann: the orthonormal sine/cosine bases on `[0, pi]`,
//! with the multiplication entries in closed form.
//! Dirac Per±: `(e^{-ikx}, 0)` and `(0, e^{ikx})` over `k` of the matching
//! parity.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{eig_all, sort_by_real, CMatrix, EigError};
use crate::model::{
    BoundaryCondition, DiracPotential, FourierSeries, HillPotential, OperatorKind, Potential,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalerkinError {
    #[error("boundary condition {bc} is not assembled by the Galerkin backend for the {kind:?} operator")]
    UnsupportedBc { kind: OperatorKind, bc: BoundaryCondition },
    #[error("truncation N = {n} is smaller than the potential's largest exponent {max_exponent}")]
    TruncationTooSmall { n: usize, max_exponent: i64 },
    #[error("index n = {n} is not valid for {bc} ({reason})")]
    BadIndex {
        n: i64,
        bc: BoundaryCondition,
        reason: &'static str,
    },
    #[error("invalid truncation plan: {0}")]
    BadPlan(&'static str),
    #[error("found {found} eigenvalues in the disc |z - {center}| <= {radius}, expected {expected}")]
    DiscCount {
        center: f64,
        radius: f64,
        found: usize,
        expected: usize,
    },
    #[error("eigenvalues did not settle: change {change:.3e} between N = {sizes:?} exceeds {tol:.1e} (last two: {previous:?} -> {last:?})")]
    NotConverged {
        sizes: (usize, usize),
        change: f64,
        tol: f64,
        previous: Vec<Complex64>,
        last: Vec<Complex64>,
    },
    #[error(transparent)]
    Eig(#[from] EigError),
}

/// Increasing truncation sizes and the absolute agreement required between
/// consecutive sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationPlan {
    pub sizes: Vec<usize>,
    pub tol: f64,
}

impl TruncationPlan {
    pub fn new(sizes: Vec<usize>, tol: f64) -> Result<Self, GalerkinError> {
        if sizes.is_empty() {
            return Err(GalerkinError::BadPlan("no sizes"));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GalerkinError::BadPlan("sizes must be strictly increasing"));
        }
        if !(tol > 0.0) {
            return Err(GalerkinError::BadPlan("tolerance must be positive"));
        }
        Ok(Self { sizes, tol })
    }

    /// `{max(32, 4 n_max), twice that}` with tolerance 1e-10.
    pub fn default_for(n_max: i64) -> Self {
        let base = (4 * n_max.unsigned_abs() as usize).max(32);
        Self {
            sizes: vec![base, 2 * base],
            tol: 1e-10,
        }
    }

    /// Schedule for `bc`: the periodic bases converge geometrically and use
    /// [`TruncationPlan::default_for`]; the sine/cosine bases converge
    /// algebraically, so their schedule keeps doubling (up to 512).
    pub fn default_for_bc(bc: BoundaryCondition, n_max: i64) -> Self {
        let mut plan = Self::default_for(n_max);
        if matches!(bc.canonical(), BoundaryCondition::Dirichlet | BoundaryCondition::Neumann) {
            let mut s = plan.sizes[1];
            while s < 512 {
                s *= 2;
                plan.sizes.push(s);
            }
        }
        plan
    }

    pub fn single(n: usize) -> Self {
        Self {
            sizes: vec![n],
            tol: f64::INFINITY,
        }
    }
}

/// `int_0^pi e^{iqx} dx` for integer `q`.
fn exp_integral(q: i64) -> Complex64 {
    if q == 0 {
        Complex64::new(PI, 0.0)
    } else if q.rem_euclid(2) == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, 2.0 / q as f64)
    }
}

/// `int_0^pi e^{2imx} cos(px) dx`.
fn exp_cos_integral(m: i64, p: i64) -> Complex64 {
    0.5 * (exp_integral(2 * m + p) + exp_integral(2 * m - p))
}

/// Basis exponents for the periodic (`shift = 0`) or antiperiodic
/// (`shift = 1`) family: `k = 2j + shift`.
fn parity_exponents(bc: BoundaryCondition, n: usize) -> Vec<i64> {
    let n = n as i64;
    match bc {
        BoundaryCondition::PerPlus => (-n..=n).map(|j| 2 * j).collect(),
        _ => (-n - 1..=n).map(|j| 2 * j + 1).collect(),
    }
}

fn check_truncation(n: usize, max_exponent: i64) -> Result<(), GalerkinError> {
    if (n as i64) < max_exponent {
        return Err(GalerkinError::TruncationTooSmall { n, max_exponent });
    }
    Ok(())
}

pub fn build_hill_matrix(
    v: &HillPotential,
    bc: BoundaryCondition,
    n: usize,
) -> Result<CMatrix, GalerkinError> {
    check_truncation(n, v.max_exponent())?;
    let bc = bc.canonical();
    match bc {
        BoundaryCondition::PerPlus | BoundaryCondition::PerMinus => {
            let ks = parity_exponents(bc, n);
            let dim = ks.len();
            Ok(CMatrix::from_fn(dim, dim, |i, j| {
                let diag = if i == j {
                    Complex64::new((ks[i] * ks[i]) as f64, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                diag + v.v.coeff((ks[i] - ks[j]) / 2)
            }))
        }
        BoundaryCondition::Dirichlet => Ok(sine_cosine_matrix(&v.v, n, false)),
        BoundaryCondition::Neumann => Ok(sine_cosine_matrix(&v.v, n, true)),
        BoundaryCondition::Quasi(_) => Err(GalerkinError::UnsupportedBc {
            kind: OperatorKind::Hill,
            bc,
        }),
    }
}

/// Sine basis `sqrt(2/pi) sin(kx)`, `1 <= k <= n`, or cosine basis
/// `1/sqrt(pi)`, `sqrt(2/pi) cos(kx)`, `0 <= k <= n`.
fn sine_cosine_matrix(v: &FourierSeries, n: usize, cosine: bool) -> CMatrix {
    let ks: Vec<i64> = if cosine {
        (0..=n as i64).collect()
    } else {
        (1..=n as i64).collect()
    };
    let norm = |k: i64| {
        if k == 0 {
            (1.0 / PI).sqrt()
        } else {
            (2.0 / PI).sqrt()
        }
    };
    let dim = ks.len();
    CMatrix::from_fn(dim, dim, |i, j| {
        let (k, l) = (ks[i], ks[j]);
        // sin sin = (cos(k-l) - cos(k+l))/2, cos cos = (cos(k-l) + cos(k+l))/2
        let sign = if cosine { 1.0 } else { -1.0 };
        let mut entry: Complex64 = v
            .iter()
            .map(|(m, c)| c * 0.5 * (exp_cos_integral(m, k - l) + sign * exp_cos_integral(m, k + l)))
            .sum();
        entry *= norm(k) * norm(l);
        if i == j {
            entry += (k * k) as f64;
        }
        entry
    })
}

pub fn build_dirac_matrix(
    v: &DiracPotential,
    bc: BoundaryCondition,
    n: usize,
) -> Result<CMatrix, GalerkinError> {
    check_truncation(n, v.max_exponent())?;
    let bc = bc.canonical();
    if !matches!(bc, BoundaryCondition::PerPlus | BoundaryCondition::PerMinus) {
        return Err(GalerkinError::UnsupportedBc {
            kind: OperatorKind::Dirac,
            bc,
        });
    }
    let ks = parity_exponents(bc, n);
    let m = ks.len();
    let mut out = CMatrix::zeros(2 * m, 2 * m);
    for (i, &k) in ks.iter().enumerate() {
        out[(i, i)] = Complex64::new(k as f64, 0.0);
        out[(m + i, m + i)] = Complex64::new(k as f64, 0.0);
        for (j, &l) in ks.iter().enumerate() {
            // P (0, e^{ilx}) lands on (e^{-ikx}, 0) through p_{-(k+l)/2}
            out[(i, m + j)] = v.p.coeff(-(k + l) / 2);
            // Q (e^{-ilx}, 0) lands on (0, e^{ikx}) through q_{(k+l)/2}
            out[(m + i, j)] = v.q.coeff((k + l) / 2);
        }
    }
    Ok(out)
}

pub fn build_matrix(
    v: &Potential,
    bc: BoundaryCondition,
    n: usize,
) -> Result<CMatrix, GalerkinError> {
    match v {
        Potential::Hill(h) => build_hill_matrix(h, bc, n),
        Potential::Dirac(d) => build_dirac_matrix(d, bc, n),
    }
}

/// All eigenvalues of the truncated operator, sorted by real part.
pub fn spectrum(v: &Potential, bc: BoundaryCondition, n: usize) -> Result<Vec<Complex64>, GalerkinError> {
    let m = build_matrix(v, bc, n)?;
    let mut e = eig_all(&m)?;
    sort_by_real(&mut e);
    Ok(e)
}

/// Converged eigenvalues with the size at which they were accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct Converged {
    pub values: Vec<Complex64>,
    pub size: usize,
    /// Largest matched change against the previous size (`inf` for a
    /// single-size plan).
    pub change: f64,
}

/// Largest distance under greedy nearest-neighbour matching of `a` onto `b`.
pub fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            used[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

fn run_plan<F>(plan: &TruncationPlan, mut select: F) -> Result<Converged, GalerkinError>
where
    F: FnMut(usize) -> Result<Vec<Complex64>, GalerkinError>,
{
    let mut prev: Option<(usize, Vec<Complex64>)> = None;
    let mut last_change = f64::INFINITY;
    for &size in &plan.sizes {
        let sel = select(size)?;
        if let Some((psize, pvals)) = &prev {
            let change = matched_distance(pvals, &sel);
            last_change = change;
            if change < plan.tol {
                return Ok(Converged {
                    values: sel,
                    size,
                    change,
                });
            }
            if size == *plan.sizes.last().unwrap() {
                return Err(GalerkinError::NotConverged {
                    sizes: (*psize, size),
                    change,
                    tol: plan.tol,
                    previous: pvals.clone(),
                    last: sel,
                });
            }
        }
        prev = Some((size, sel));
    }
    let (size, values) = prev.expect("plan has at least one size");
    Ok(Converged {
        values,
        size,
        change: last_change,
    })
}

/// Expected number of eigenvalues near `lambda0(n)` for `bc`.
pub fn expected_count(kind: OperatorKind, bc: BoundaryCondition, n: i64) -> Result<usize, GalerkinError> {
    let bc = bc.canonical();
    let bad = |reason| Err(GalerkinError::BadIndex { n, bc, reason });
    match kind {
        OperatorKind::Hill => {
            if n < 0 {
                return bad("Hill indices are non-negative");
            }
            match bc {
                BoundaryCondition::PerPlus if n % 2 != 0 => bad("Per+ serves even n"),
                BoundaryCondition::PerMinus if n % 2 != 1 => bad("Per- serves odd n"),
                BoundaryCondition::PerPlus if n == 0 => Ok(1),
                BoundaryCondition::Dirichlet if n == 0 => bad("Dirichlet indices start at 1"),
                _ => Ok(bc.cluster_size()),
            }
        }
        OperatorKind::Dirac => match bc {
            BoundaryCondition::PerPlus if n.rem_euclid(2) != 0 => bad("Per+ serves even n"),
            BoundaryCondition::PerMinus if n.rem_euclid(2) != 1 => bad("Per- serves odd n"),
            BoundaryCondition::Neumann => bad("no Neumann condition for Dirac"),
            _ => Ok(bc.cluster_size()),
        },
    }
}

/// Eigenvalues inside the localization disc around `lambda0(n)`, refined
/// over the sizes of `plan` until consecutive sizes agree to `plan.tol`.
pub fn eigs_near(
    v: &Potential,
    bc: BoundaryCondition,
    n: i64,
    plan: &TruncationPlan,
) -> Result<Converged, GalerkinError> {
    let kind = v.kind();
    let expected = expected_count(kind, bc, n)?;
    if kind == OperatorKind::Hill && n == 0 {
        return Err(GalerkinError::BadIndex {
            n,
            bc,
            reason: "the localization disc has zero radius at n = 0",
        });
    }
    let center = kind.lambda0(n);
    let radius = kind.disc_radius(n);
    let mut last_count = 0;
    let out = run_plan(plan, |size| {
        let e = spectrum(v, bc, size)?;
        let sel: Vec<Complex64> = e
            .into_iter()
            .filter(|z| (z - center).norm() <= radius * (1.0 + 1e-9))
            .collect();
        last_count = sel.len();
        Ok(sel)
    });
    match out {
        Ok(c) if c.values.len() == expected => Ok(c),
        Ok(c) => Err(GalerkinError::DiscCount {
            center,
            radius,
            found: c.values.len(),
            expected,
        }),
        Err(GalerkinError::NotConverged { .. }) if last_count != expected => {
            Err(GalerkinError::DiscCount {
                center,
                radius,
                found: last_count,
                expected,
            })
        }
        Err(e) => Err(e),
    }
}

/// Positions in the real-part-sorted spectrum that hold the n-th cluster.
pub fn cluster_positions(
    kind: OperatorKind,
    bc: BoundaryCondition,
    n: i64,
    size: usize,
) -> Result<Vec<usize>, GalerkinError> {
    let bc = bc.canonical();
    expected_count(kind, bc, n)?;
    let big_n = size as i64;
    let out_of_range = || GalerkinError::BadIndex {
        n,
        bc,
        reason: "index too close to the truncation edge",
    };
    let pos: Vec<i64> = match (kind, bc) {
        (OperatorKind::Hill, BoundaryCondition::PerPlus) => {
            if n == 0 {
                vec![0]
            } else {
                vec![n - 1, n]
            }
        }
        (OperatorKind::Hill, BoundaryCondition::PerMinus) => vec![n - 1, n],
        (OperatorKind::Hill, BoundaryCondition::Dirichlet) => vec![n - 1],
        (OperatorKind::Hill, BoundaryCondition::Neumann) => vec![n],
        (OperatorKind::Dirac, BoundaryCondition::PerPlus) => vec![n + 2 * big_n, n + 2 * big_n + 1],
        (OperatorKind::Dirac, BoundaryCondition::PerMinus) => {
            vec![n + 2 * big_n + 1, n + 2 * big_n + 2]
        }
        _ => {
            return Err(GalerkinError::UnsupportedBc { kind, bc });
        }
    };
    // keep clear of the truncation edge: the top quarter of the basis is
    // polluted by the cut
    let limit = match kind {
        OperatorKind::Hill => big_n,
        OperatorKind::Dirac => 2 * big_n,
    };
    let reach = match kind {
        OperatorKind::Hill => n.abs(),
        OperatorKind::Dirac => n.abs(),
    };
    if 2 * reach > limit {
        return Err(out_of_range());
    }
    Ok(pos.into_iter().map(|p| p as usize).collect())
}

/// The n-th cluster picked by counting in the real-part-sorted spectrum,
/// refined over `plan`. Unlike [`eigs_near`] this also serves small `n`
/// where the localization disc does not yet isolate the cluster.
pub fn eigs_indexed(
    v: &Potential,
    bc: BoundaryCondition,
    n: i64,
    plan: &TruncationPlan,
) -> Result<Converged, GalerkinError> {
    let kind = v.kind();
    run_plan(plan, |size| {
        let pos = cluster_positions(kind, bc, n, size)?;
        let e = spectrum(v, bc, size)?;
        Ok(pos.into_iter().map(|p| e[p]).collect())
    })
}

/// Clusters for several indices from one eigen-solve per plan size.
pub fn eigs_indexed_many(
    v: &Potential,
    bc: BoundaryCondition,
    ns: &[i64],
    plan: &TruncationPlan,
) -> Result<Vec<(i64, Converged)>, GalerkinError> {
    let kind = v.kind();
    let mut per_size: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for &size in &plan.sizes {
        per_size.push((size, spectrum(v, bc, size)?));
    }
    ns.iter()
        .map(|&n| {
            let mut it = per_size.iter();
            let c = run_plan(plan, |size| {
                let (_, e) = it.find(|(s, _)| *s == size).expect("size computed above");
                let pos = cluster_positions(kind, bc, n, size)?;
                Ok(pos.into_iter().map(|p| e[p]).collect())
            })?;
            Ok((n, c))
        })
        .collect()
}
