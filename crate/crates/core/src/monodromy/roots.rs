//! Root finding for the characteristic functions: Newton with deflation,
//! a solver for close pairs, argument-principle counting, and continuation
//! from the free operator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{characteristic, Integration, MonodromyError};
use crate::model::{BoundaryCondition, OperatorKind, Potential};

/// Value and lambda-derivative of a characteristic function.
pub type CharFn<'a> = dyn Fn(Complex64) -> Result<(Complex64, Complex64), MonodromyError> + Sync + 'a;

const EPS: f64 = f64::EPSILON;
/// Below this relative step size a stalled Newton iteration is taken to
/// have reached the noise floor of the characteristic function.
const NOISE: f64 = 1e-7;
pub const MAX_NEWTON: usize = 50;

/// Roots found near a center, with the contour that certified their count.
#[derive(Clone, Debug, PartialEq)]
pub struct RootReport {
    pub roots: Vec<Complex64>,
    pub contour_center: Complex64,
    pub contour_radius: f64,
}

fn scale_of(z: Complex64) -> f64 {
    z.norm().max(1.0)
}

/// Newton's method on `f / prod (z - others)`.
pub fn newton_deflated(
    f: &CharFn<'_>,
    z0: Complex64,
    others: &[Complex64],
    max_iter: usize,
) -> Result<Complex64, MonodromyError> {
    let mut z = z0;
    let mut prev = f64::INFINITY;
    for _ in 0..max_iter {
        let (fz, dfz) = f(z)?;
        if fz == Complex64::new(0.0, 0.0) {
            return Ok(z);
        }
        let pull: Complex64 = others.iter().map(|o| 1.0 / (z - o)).sum();
        let step = fz / (dfz - fz * pull);
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(MonodromyError::NewtonFailed {
                iterations: max_iter,
                last: z,
            });
        }
        z -= step;
        let s = step.norm();
        let scale = scale_of(z);
        if s <= 8.0 * EPS * scale || (s > 0.5 * prev && prev < NOISE * scale) {
            return Ok(z);
        }
        prev = s;
    }
    Err(MonodromyError::NewtonFailed {
        iterations: max_iter,
        last: z,
    })
}

pub fn newton(f: &CharFn<'_>, z0: Complex64, max_iter: usize) -> Result<Complex64, MonodromyError> {
    newton_deflated(f, z0, &[], max_iter)
}

/// Both roots of a pair near `x0`.
///
/// Newton steps doubled for multiplicity two converge to the pair's
/// midpoint; a local quadratic model there separates the pair, and each
/// root is polished with Newton deflated by the other. `h` is the
/// difference step for the second derivative and `max_step` bounds the
/// first move.
pub fn cluster_pair(
    f: &CharFn<'_>,
    x0: Complex64,
    h: f64,
    max_step: f64,
    max_iter: usize,
) -> Result<[Complex64; 2], MonodromyError> {
    let mut x = x0;
    let mut prev = f64::INFINITY;
    for _ in 0..max_iter {
        let (fx, dfx) = f(x)?;
        if fx == Complex64::new(0.0, 0.0) && dfx == Complex64::new(0.0, 0.0) {
            return Ok([x, x]);
        }
        let step = 2.0 * fx / dfx;
        let s = step.norm();
        // a growing step means x already sits within the pair's spacing
        if !s.is_finite() || s > max_step || s > 0.5 * prev {
            break;
        }
        x -= step;
        if s <= 8.0 * EPS * scale_of(x) {
            break;
        }
        prev = s;
    }
    let (fx, dfx) = f(x)?;
    let (_, dplus) = f(x + h)?;
    let (_, dminus) = f(x - h)?;
    let d2 = (dplus - dminus) / (2.0 * h);
    if d2 == Complex64::new(0.0, 0.0) {
        return Ok([x, x]);
    }
    // roots of fx + dfx d + d2 d^2 / 2, in cancellation-free form
    let disc = (dfx * dfx - 2.0 * fx * d2).sqrt();
    let q = if (dfx + disc).norm() >= (dfx - disc).norm() {
        -(dfx + disc)
    } else {
        -(dfx - disc)
    };
    let (r1, r2) = if q == Complex64::new(0.0, 0.0) {
        (x, x)
    } else {
        (x + q / d2, x + 2.0 * fx / q)
    };
    if (r1 - r2).norm() <= 1e-13 * scale_of(x) {
        return Ok([r1, r2]);
    }
    let p1 = newton_deflated(f, r1, &[r2], MAX_NEWTON)?;
    let p2 = newton_deflated(f, r2, &[p1], MAX_NEWTON)?;
    Ok([p1, p2])
}

/// Winding number of `f` around the circle `|z - center| = radius`,
/// trapezoid rule on `nodes` points (doubled up to 1024 until the sum is
/// close to an integer).
pub fn argument_count(
    f: &CharFn<'_>,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<(i64, f64), MonodromyError> {
    let mut nodes = nodes.max(64);
    loop {
        let vals: Result<Vec<(Complex64, Complex64, Complex64)>, MonodromyError> = (0..nodes)
            .into_par_iter()
            .map(|j| {
                let w = Complex64::from_polar(radius, 2.0 * PI * j as f64 / nodes as f64);
                let (fz, dfz) = f(center + w)?;
                Ok((w, fz, dfz))
            })
            .collect();
        let vals = vals?;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut fmin = f64::INFINITY;
        let mut fmax: f64 = 0.0;
        for (w, fz, dfz) in &vals {
            sum += dfz / fz * w;
            fmin = fmin.min(fz.norm());
            fmax = fmax.max(fz.norm());
        }
        sum /= nodes as f64;
        let rel_min = if fmax > 0.0 { fmin / fmax } else { 0.0 };
        let k = sum.re.round();
        let off = (sum - k).norm();
        if (off < 0.05 && sum.re.is_finite()) || nodes >= 1024 {
            if off >= 0.05 || !sum.re.is_finite() {
                return Ok((-1, rel_min));
            }
            return Ok((k as i64, rel_min));
        }
        nodes *= 2;
    }
}

/// Count with the radius nudged by 5% either way when `f` nearly vanishes
/// on the contour.
fn certified_count(
    f: &CharFn<'_>,
    center: Complex64,
    radius: f64,
) -> Result<(i64, f64), MonodromyError> {
    let mut last = (0, radius);
    for r in [radius, 1.05 * radius, 0.95 * radius] {
        let (k, rel_min) = argument_count(f, center, r, 64)?;
        last = (k, r);
        if rel_min > 1e-13 && k >= 0 {
            return Ok((k, r));
        }
    }
    Ok(last)
}

fn expected_count(kind: OperatorKind, bc: BoundaryCondition, n: i64) -> Result<usize, MonodromyError> {
    let bc = bc.canonical();
    let bad = |reason| Err(MonodromyError::BadIndex { n, bc, reason });
    match (kind, bc) {
        (_, BoundaryCondition::Quasi(_)) => bad("quasi-periodic roots are not indexed by n"),
        (OperatorKind::Dirac, BoundaryCondition::Neumann) => {
            Err(MonodromyError::UnsupportedBc { kind, bc })
        }
        (OperatorKind::Hill, _) if n < 0 => bad("Hill indices are non-negative"),
        (_, BoundaryCondition::PerPlus) if n.rem_euclid(2) != 0 => bad("Per+ serves even n"),
        (_, BoundaryCondition::PerMinus) if n.rem_euclid(2) != 1 => bad("Per- serves odd n"),
        (OperatorKind::Hill, BoundaryCondition::PerPlus) if n == 0 => Ok(1),
        (OperatorKind::Hill, BoundaryCondition::Dirichlet) if n == 0 => {
            bad("Dirichlet indices start at 1")
        }
        _ => Ok(bc.cluster_size()),
    }
}

/// Roots of the characteristic function of `bc` inside
/// `|z - center| < radius`, where exactly `expected` (1 or 2) are assumed.
pub fn solve_near(
    v: &Potential,
    bc: BoundaryCondition,
    center: Complex64,
    radius: f64,
    expected: usize,
    integ: &Integration,
) -> Result<RootReport, MonodromyError> {
    let f = |z: Complex64| characteristic(v, bc, z, integ);
    let roots = match expected {
        1 => vec![newton(&f, center, MAX_NEWTON)?],
        2 => cluster_pair(&f, center, 1e-3 * radius, radius, MAX_NEWTON)?.to_vec(),
        _ => {
            return Err(MonodromyError::CountMismatch {
                center,
                radius,
                found: -1,
                expected,
            })
        }
    };
    let (found, r) = certified_count(&f, center, radius)?;
    if found != expected as i64 || roots.iter().any(|z| (z - center).norm() >= r) {
        return Err(MonodromyError::CountMismatch {
            center,
            radius: r,
            found,
            expected,
        });
    }
    Ok(RootReport {
        roots,
        contour_center: center,
        contour_radius: r,
    })
}

/// Roots in the localization disc around `lambda0(n)`: two for Per±, one
/// for Dirichlet and Neumann, certified by the argument principle on the
/// disc boundary.
pub fn solve_bc(
    v: &Potential,
    bc: BoundaryCondition,
    n: i64,
    integ: &Integration,
) -> Result<RootReport, MonodromyError> {
    let kind = v.kind();
    let expected = expected_count(kind, bc, n)?;
    let radius = kind.disc_radius(n);
    if radius == 0.0 {
        return Err(MonodromyError::BadIndex {
            n,
            bc,
            reason: "the localization disc has zero radius",
        });
    }
    let center = Complex64::new(kind.lambda0(n), 0.0);
    solve_near(v, bc, center, radius, expected, integ)
}

/// Spacing scale of the free spectrum around `lambda0(n)`.
fn natural_radius(kind: OperatorKind, n: i64) -> f64 {
    match kind {
        OperatorKind::Hill => (n.abs() as f64 / 4.0).max(0.25),
        OperatorKind::Dirac => 0.5,
    }
}

fn centroid(c: &[Complex64]) -> Complex64 {
    c.iter().sum::<Complex64>() / c.len() as f64
}

fn spread(c: &[Complex64]) -> f64 {
    let mut s: f64 = 0.0;
    for a in c {
        for b in c {
            s = s.max((a - b).norm());
        }
    }
    s
}

/// Follow one cluster of roots along `s v`, `s` from 0 to 1.
fn track_cluster(
    v: &Potential,
    bc: BoundaryCondition,
    start: &[Complex64],
    move_limit: f64,
    integ: &Integration,
) -> Result<Vec<Complex64>, MonodromyError> {
    let mut cur = start.to_vec();
    let mut s = 0.0f64;
    let mut ds = 0.125f64;
    while s < 1.0 {
        let s1 = (s + ds).min(1.0);
        let vs = v.scaled(s1);
        let f = |z: Complex64| characteristic(&vs, bc, z, integ);
        let attempt: Result<Vec<Complex64>, MonodromyError> = match cur.len() {
            1 => newton(&f, cur[0], 15).map(|z| vec![z]),
            _ => {
                if spread(&cur) > 0.05 * move_limit {
                    newton_deflated(&f, cur[0], &[cur[1]], 15).and_then(|a| {
                        newton_deflated(&f, cur[1], &[a], 15).map(|b| vec![a, b])
                    })
                } else {
                    cluster_pair(&f, centroid(&cur), 1e-3 * move_limit, move_limit, 20)
                        .map(|r| r.to_vec())
                }
            }
        };
        let accepted = match attempt {
            Ok(next) => {
                let moved = next
                    .iter()
                    .map(|z| cur.iter().map(|c| (z - c).norm()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                let cen_moved = (centroid(&next) - centroid(&cur)).norm();
                if moved <= move_limit && cen_moved <= move_limit {
                    Some(next)
                } else {
                    None
                }
            }
            Err(_) => None,
        };
        match accepted {
            Some(next) => {
                cur = next;
                s = s1;
                ds = (ds * 1.5).min(0.25);
            }
            None => {
                ds *= 0.5;
                if ds < 1e-4 {
                    return Err(MonodromyError::ContinuationStalled { s });
                }
            }
        }
    }
    Ok(cur)
}

/// Certify a tracked cluster with a contour around its centroid, shrinking
/// toward the cluster when the first circle catches other roots.
fn certify_cluster(
    v: &Potential,
    bc: BoundaryCondition,
    roots: &[Complex64],
    radius: f64,
    integ: &Integration,
) -> Result<RootReport, MonodromyError> {
    let f = |z: Complex64| characteristic(v, bc, z, integ);
    let center = centroid(roots);
    let sp = spread(roots);
    let mut r = radius.max(0.75 * sp);
    let mut last = (0, r);
    for _ in 0..8 {
        let (k, used) = certified_count(&f, center, r)?;
        last = (k, used);
        if k == roots.len() as i64 && roots.iter().all(|z| (z - center).norm() < used) {
            return Ok(RootReport {
                roots: roots.to_vec(),
                contour_center: center,
                contour_radius: used,
            });
        }
        let smaller = (0.5 * r).max(0.6 * sp);
        if smaller >= r {
            break;
        }
        r = smaller;
    }
    Err(MonodromyError::CountMismatch {
        center,
        radius: last.1,
        found: last.0,
        expected: roots.len(),
    })
}

/// Roots of the n-th cluster obtained by continuation from the free
/// operator. Unlike [`solve_bc`] this does not need the localization disc
/// to isolate the cluster, so it serves small `n` and the Dirac Dirichlet
/// problem at strong coupling.
pub fn solve_tracked(
    v: &Potential,
    bc: BoundaryCondition,
    n: i64,
    integ: &Integration,
) -> Result<RootReport, MonodromyError> {
    let kind = v.kind();
    let count = expected_count(kind, bc, n)?;
    let lam0 = Complex64::new(kind.lambda0(n), 0.0);
    let start = vec![lam0; count];
    let limit = natural_radius(kind, n);
    let roots = track_cluster(v, bc, &start, 0.5 * limit, integ)?;
    certify_cluster(v, bc, &roots, limit, integ)
}

/// Free quasi-periodic spectrum for `y(pi) = e^{it} y(0)`, grouped into
/// clusters of coinciding roots: `(2k + t/pi)^2` (Hill, ascending) or
/// `2k +- t/pi` (Dirac, by distance from 0). At least `count` roots.
pub fn free_quasi_roots(kind: OperatorKind, t: f64, count: usize) -> Vec<Vec<Complex64>> {
    let tau = match BoundaryCondition::quasi(t) {
        BoundaryCondition::Quasi(w) => w / PI,
        _ => unreachable!(),
    };
    let kmax = count as i64 + 2;
    let mut vals: Vec<f64> = match kind {
        OperatorKind::Hill => (-kmax..=kmax).map(|k| (2.0 * k as f64 + tau).powi(2)).collect(),
        OperatorKind::Dirac => (-kmax..=kmax)
            .flat_map(|k| [2.0 * k as f64 + tau, 2.0 * k as f64 - tau])
            .collect(),
    };
    let key = |x: &f64| match kind {
        OperatorKind::Hill => *x,
        OperatorKind::Dirac => x.abs() + 1e-9 * x.signum(),
    };
    vals.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    let mut total = 0;
    for x in vals {
        if total >= count && clusters.last().map_or(true, |c| (c[0].re - x).abs() > 1e-9) {
            break;
        }
        match clusters.last_mut() {
            Some(c) if (c[0].re - x).abs() <= 1e-9 => c.push(Complex64::new(x, 0.0)),
            _ => clusters.push(vec![Complex64::new(x, 0.0)]),
        }
        total += 1;
    }
    clusters
}

/// The `count` quasi-periodic eigenvalues for `y(pi) = e^{it} y(0)` that
/// continue the lowest free ones (Hill, sorted by real part) or those
/// nearest 0 (Dirac, sorted by modulus), each cluster certified by a
/// contour count. Two extra roots are tracked so that the cut at `count`
/// is not decided by continuation order alone.
pub fn lowest_eigenvalues(
    v: &Potential,
    t: f64,
    count: usize,
    integ: &Integration,
) -> Result<Vec<Complex64>, MonodromyError> {
    let kind = v.kind();
    let bc = BoundaryCondition::quasi(t).canonical();
    let clusters = free_quasi_roots(kind, t, count + 2);
    let centers: Vec<Complex64> = clusters.iter().map(|c| c[0]).collect();
    let tracked: Result<Vec<Vec<Complex64>>, MonodromyError> = clusters
        .par_iter()
        .enumerate()
        .map(|(i, cl)| {
            let gap = centers
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| (c - cl[0]).norm())
                .fold(f64::INFINITY, f64::min);
            let limit = 0.3 * gap.min(2.0 * natural_radius(kind, 4));
            let roots = track_cluster(v, bc, cl, limit, integ)?;
            Ok(roots)
        })
        .collect();
    let tracked = tracked?;
    let all: Vec<Complex64> = tracked.iter().flatten().copied().collect();
    tracked
        .par_iter()
        .map(|roots| {
            let c = centroid(roots);
            let others = all
                .iter()
                .filter(|z| !roots.contains(z))
                .map(|z| (z - c).norm())
                .fold(f64::INFINITY, f64::min);
            certify_cluster(v, bc, roots, 0.45 * others, integ).map(|_| ())
        })
        .collect::<Result<Vec<()>, MonodromyError>>()?;
    let mut out = all;
    match kind {
        OperatorKind::Hill => out.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())),
        OperatorKind::Dirac => out.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap().then(a.re.partial_cmp(&b.re).unwrap())),
    }
    out.truncate(count);
    Ok(out)
}
