//! Spectral triangles `(lambda^-, lambda^+, mu)` from the two backends, and
//! the diagnostics `t_n`, `r_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galerkin::{self, eigs_indexed, matched_distance, GalerkinError, TruncationPlan};
use crate::model::{
    BetaProxy, BoundaryCondition, Diagnostics, OperatorKind, Potential, SpectralTriangle,
};
use crate::monodromy::{self, Integration, MonodromyError};

/// Backend disagreement above which the monodromy values are kept and the
/// difference is reported.
pub const AGREEMENT_TOL: f64 = 1e-8;
const DISC_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriangleError {
    #[error("n = {n} has no spectral triangle ({reason})")]
    BadIndex { n: i64, reason: &'static str },
    #[error("{what} = {value} lies outside the disc |z - {center}| <= {radius}")]
    OutsideDisc {
        what: &'static str,
        value: Complex64,
        center: f64,
        radius: f64,
    },
    #[error("galerkin backend: {0}")]
    Galerkin(#[from] GalerkinError),
    #[error("monodromy backend: {0}")]
    Monodromy(#[from] MonodromyError),
    #[error("expected {expected} eigenvalues for {bc}, got {got}")]
    Count {
        bc: BoundaryCondition,
        expected: usize,
        got: usize,
    },
}

fn check_index(kind: OperatorKind, n: i64) -> Result<(), TriangleError> {
    if kind == OperatorKind::Hill && n < 1 {
        return Err(TriangleError::BadIndex {
            n,
            reason: "Hill triangles start at n = 1",
        });
    }
    Ok(())
}

/// Triangle from converged eigenvalues. Every input must lie in the
/// localization disc around `lambda0(n)`.
pub fn build_triangle(
    n: i64,
    per_pair: (Complex64, Complex64),
    dir_eig: Complex64,
    neu_eig: Option<Complex64>,
    kind: OperatorKind,
) -> Result<SpectralTriangle, TriangleError> {
    check_index(kind, n)?;
    let center = kind.lambda0(n);
    let radius = kind.disc_radius(n);
    let inside = |what: &'static str, z: Complex64| {
        if (z - center).norm() <= radius * (1.0 + DISC_SLACK) {
            Ok(())
        } else {
            Err(TriangleError::OutsideDisc {
                what,
                value: z,
                center,
                radius,
            })
        }
    };
    inside("periodic eigenvalue", per_pair.0)?;
    inside("periodic eigenvalue", per_pair.1)?;
    inside("Dirichlet eigenvalue", dir_eig)?;
    if let Some(nu) = neu_eig {
        inside("Neumann eigenvalue", nu)?;
    }
    Ok(SpectralTriangle::new(n, kind, per_pair, dir_eig, neu_eig))
}

/// `max(|B^-/B^+|, |B^+/B^-|)`; infinite when exactly one proxy vanishes,
/// absent when both do.
pub fn compute_t_n(proxy: &BetaProxy) -> Option<f64> {
    match (proxy.b_minus.is_zero(), proxy.b_plus.is_zero()) {
        (true, true) => None,
        (true, false) | (false, true) => Some(f64::INFINITY),
        _ => {
            let d = proxy.b_minus.ln_abs - proxy.b_plus.ln_abs;
            Some(d.abs().exp())
        }
    }
}

/// `|mu - lambda^+| / |gamma|`, absent when the gap is zero.
pub fn compute_r_n(tri: &SpectralTriangle) -> Option<f64> {
    let g = tri.gap.norm();
    if g == 0.0 {
        None
    } else {
        Some(tri.deviation_plus.norm() / g)
    }
}

pub fn diagnostics(tri: &SpectralTriangle, proxy: &BetaProxy) -> Diagnostics {
    Diagnostics {
        n: tri.n,
        t_n: compute_t_n(proxy),
        r_n: compute_r_n(tri),
    }
}

/// Largest finite entry, the finite-window stand-in for a limsup.
pub fn window_sup<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    values
        .into_iter()
        .flatten()
        .filter(|x| x.is_finite())
        .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Galerkin,
    Monodromy,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleOptions {
    pub backend: Backend,
    pub integration: Integration,
    /// Galerkin sizes; `None` picks the default schedule per boundary
    /// condition.
    pub plan: Option<TruncationPlan>,
    /// Also compute the Neumann eigenvalue (Hill only).
    pub neumann: bool,
}

impl Default for TriangleOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Both,
            integration: Integration::double(),
            plan: None,
            neumann: false,
        }
    }
}

/// A triangle together with how the backends compared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputedTriangle {
    pub triangle: SpectralTriangle,
    /// Largest vertex difference between the backends, when both ran.
    pub backend_diff: Option<f64>,
    pub notes: Vec<String>,
}

/// Eigenvalues of the n-th cluster by continuation from the free operator,
/// falling back to the localization disc when continuation stalls.
pub fn monodromy_cluster(
    v: &Potential,
    bc: BoundaryCondition,
    n: i64,
    integ: &Integration,
) -> Result<Vec<Complex64>, MonodromyError> {
    match monodromy::solve_tracked(v, bc, n, integ) {
        Ok(r) => Ok(r.roots),
        Err(first) => monodromy::solve_bc(v, bc, n, integ)
            .map(|r| r.roots)
            .map_err(|_| first),
    }
}

fn galerkin_cluster(
    v: &Potential,
    bc: BoundaryCondition,
    n: i64,
    plan: Option<&TruncationPlan>,
) -> Result<Vec<Complex64>, GalerkinError> {
    let default;
    let plan = match plan {
        Some(p) => p,
        None => {
            default = TruncationPlan::default_for_bc(bc, n.abs());
            &default
        }
    };
    Ok(eigs_indexed(v, bc, n, plan)?.values)
}

struct Vertices {
    pair: Vec<Complex64>,
    mu: Complex64,
    nu: Option<Complex64>,
}

fn pair_of(bc: BoundaryCondition, v: Vec<Complex64>) -> Result<Vec<Complex64>, TriangleError> {
    if v.len() != 2 {
        return Err(TriangleError::Count {
            bc,
            expected: 2,
            got: v.len(),
        });
    }
    Ok(v)
}

fn single_of(bc: BoundaryCondition, v: Vec<Complex64>) -> Result<Complex64, TriangleError> {
    if v.len() != 1 {
        return Err(TriangleError::Count {
            bc,
            expected: 1,
            got: v.len(),
        });
    }
    Ok(v[0])
}

fn vertex_diff(a: &Vertices, b: &Vertices) -> f64 {
    let mut d = matched_distance(&a.pair, &b.pair).max((a.mu - b.mu).norm());
    if let (Some(x), Some(y)) = (a.nu, b.nu) {
        d = d.max((x - y).norm());
    }
    d
}

/// Triangle at index `n` for `v` with the requested backends.
///
/// The Dirac Dirichlet eigenvalue always comes from monodromy. With
/// [`Backend::Both`] the monodromy vertices are kept and the difference to
/// Galerkin is recorded.
pub fn compute_triangle(
    v: &Potential,
    n: i64,
    opts: &TriangleOptions,
) -> Result<ComputedTriangle, TriangleError> {
    let kind = v.kind();
    check_index(kind, n)?;
    let per = BoundaryCondition::periodic_for(n);
    let neumann = opts.neumann && kind == OperatorKind::Hill;
    let mut notes = Vec::new();
    let integ = &opts.integration;

    let mono = |with_mu: Option<Complex64>| -> Result<Vertices, TriangleError> {
        let pair = pair_of(per, monodromy_cluster(v, per, n, integ)?)?;
        let mu = match with_mu {
            Some(mu) => mu,
            None => single_of(
                BoundaryCondition::Dirichlet,
                monodromy_cluster(v, BoundaryCondition::Dirichlet, n, integ)?,
            )?,
        };
        let nu = if neumann {
            Some(single_of(
                BoundaryCondition::Neumann,
                monodromy_cluster(v, BoundaryCondition::Neumann, n, integ)?,
            )?)
        } else {
            None
        };
        Ok(Vertices { pair, mu, nu })
    };
    let gal = |dirac_mu: &mut Option<Complex64>| -> Result<Vertices, TriangleError> {
        let plan = opts.plan.as_ref();
        let pair = pair_of(per, galerkin_cluster(v, per, n, plan)?)?;
        let mu = match kind {
            OperatorKind::Hill => single_of(
                BoundaryCondition::Dirichlet,
                galerkin_cluster(v, BoundaryCondition::Dirichlet, n, plan)?,
            )?,
            OperatorKind::Dirac => {
                let mu = single_of(
                    BoundaryCondition::Dirichlet,
                    monodromy_cluster(v, BoundaryCondition::Dirichlet, n, integ)?,
                )?;
                *dirac_mu = Some(mu);
                mu
            }
        };
        let nu = if neumann {
            Some(single_of(
                BoundaryCondition::Neumann,
                galerkin_cluster(v, BoundaryCondition::Neumann, n, plan)?,
            )?)
        } else {
            None
        };
        Ok(Vertices { pair, mu, nu })
    };

    let mut dirac_mu = None;
    let (chosen, backend_diff) = match opts.backend {
        Backend::Monodromy => (mono(None)?, None),
        Backend::Galerkin => {
            let g = gal(&mut dirac_mu)?;
            if dirac_mu.is_some() {
                notes.push("Dirac Dirichlet eigenvalue from monodromy".to_string());
            }
            (g, None)
        }
        Backend::Both => {
            let g = gal(&mut dirac_mu)?;
            let m = mono(dirac_mu)?;
            let d = vertex_diff(&g, &m);
            if d > AGREEMENT_TOL {
                log::warn!("n = {n}: backends differ by {d:.3e}; keeping monodromy values");
                notes.push(format!("backends differ by {d:.3e}; monodromy values kept"));
            }
            (m, Some(d))
        }
    };

    let center = kind.lambda0(n);
    let radius = kind.disc_radius(n);
    let outside = chosen
        .pair
        .iter()
        .chain(std::iter::once(&chosen.mu))
        .chain(chosen.nu.iter())
        .any(|z| (z - center).norm() > radius * (1.0 + DISC_SLACK));
    if outside {
        notes.push("vertex outside the localization disc; labels from continuation".to_string());
    }
    let triangle = SpectralTriangle::new(n, kind, (chosen.pair[0], chosen.pair[1]), chosen.mu, chosen.nu);
    Ok(ComputedTriangle {
        triangle,
        backend_diff,
        notes,
    })
}

/// Expected-count helper re-exported for callers that size outputs.
pub fn cluster_size(kind: OperatorKind, bc: BoundaryCondition, n: i64) -> Result<usize, TriangleError> {
    Ok(galerkin::expected_count(kind, bc, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logc::LogComplex;
    use crate::model::HillPotential;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn proxy(bm: Complex64, bp: Complex64) -> BetaProxy {
        let (b_minus, b_plus) = (LogComplex::from_c64(bm), LogComplex::from_c64(bp));
        BetaProxy {
            n: 1,
            b_minus,
            b_plus,
            sqrt_minus: b_minus.sqrt(),
            sqrt_plus: b_plus.sqrt(),
            resolved: true,
        }
    }

    #[test]
    fn trivial_triangles() {
        let t = build_triangle(3, (c(9.0, 0.0), c(9.0, 0.0)), c(9.0, 0.0), None, OperatorKind::Hill).unwrap();
        assert_eq!(t.gap, c(0.0, 0.0));
        assert_eq!(t.deviation_plus, c(0.0, 0.0));
        let t = build_triangle(2, (c(4.1, 0.0), c(3.9, 0.0)), c(4.05, 0.0), None, OperatorKind::Hill).unwrap();
        assert!((t.gap - 0.2).norm() < 1e-14);
        assert!((t.deviation_plus + 0.05).norm() < 1e-14);
        assert!((t.midpoint_dev - 0.05).norm() < 1e-14);
        assert!((compute_r_n(&t).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn outside_disc_rejected() {
        let e = build_triangle(2, (c(3.9, 0.0), c(4.1, 0.0)), c(5.2, 0.0), None, OperatorKind::Hill);
        assert!(matches!(e, Err(TriangleError::OutsideDisc { .. })));
        assert!(build_triangle(0, (c(0.0, 0.0), c(0.0, 0.0)), c(0.0, 0.0), None, OperatorKind::Hill).is_err());
    }

    #[test]
    fn r_n_examples() {
        let t = SpectralTriangle::new(1, OperatorKind::Dirac, (c(0.0, -1.0), c(0.0, 1.0)), c(1.0, 1.0), None);
        assert!((t.gap - c(0.0, 2.0)).norm() < 1e-15);
        assert!((compute_r_n(&t).unwrap() - 0.5).abs() < 1e-15);
        let t = SpectralTriangle::new(1, OperatorKind::Dirac, (c(1.0, 0.0), c(1.0, 0.0)), c(1.0, 0.0), None);
        assert_eq!(compute_r_n(&t), None);
    }

    #[test]
    fn t_n_examples() {
        assert!((compute_t_n(&proxy(c(3.0, 0.0), c(1.0, 0.0))).unwrap() - 3.0).abs() < 1e-14);
        assert!((compute_t_n(&proxy(c(0.0, 1.0), c(0.0, -1.0))).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(compute_t_n(&proxy(c(0.0, 0.0), c(2.0, 0.0))), Some(f64::INFINITY));
        assert_eq!(compute_t_n(&proxy(c(0.0, 0.0), c(0.0, 0.0))), None);
    }

    #[test]
    fn mathieu_first_triangle_is_ordered() {
        let v: Potential = HillPotential::mathieu(1.0).into();
        let opts = TriangleOptions {
            neumann: true,
            ..TriangleOptions::default()
        };
        let ct = compute_triangle(&v, 1, &opts).unwrap();
        let t = ct.triangle;
        assert!(ct.backend_diff.unwrap() < 1e-8);
        assert!(t.lambda_minus.re <= t.mu.re && t.mu.re <= t.lambda_plus.re);
        assert!(t.lambda_minus.im.abs() < 1e-8 && t.lambda_plus.im.abs() < 1e-8 && t.mu.im.abs() < 1e-8);
        assert!(t.nu.is_some());
    }

    #[test]
    fn window_sup_skips_absent_and_infinite() {
        assert_eq!(window_sup([Some(1.0), None, Some(f64::INFINITY), Some(3.0)]), Some(3.0));
        assert_eq!(window_sup([None, None]), None);
    }
}
