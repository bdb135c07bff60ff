//! Dense nonsymmetric complex eigenvalues: diagonal balancing, Householder
//! reduction to upper Hessenberg form, then implicit single-shift QR with
//! Wilkinson shifts and deflation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;

pub const MAX_DIM: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {0} exceeds the dense limit {MAX_DIM}")]
    TooLarge(usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("QR iteration failed to converge for a {size}x{size} matrix after {iterations} sweeps (last shifts {last_shifts:?})")]
    NoConvergence {
        size: usize,
        iterations: usize,
        last_shifts: Vec<Complex64>,
    },
}

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Scale rows and columns by powers of two so row and column norms match
/// (Parlett-Reinsch). Returns the scaled matrix; eigenvalues are unchanged.
pub fn balance(mut a: CMatrix) -> CMatrix {
    let n = a.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 200 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    a
}

/// Householder reduction to upper Hessenberg form (similarity transform).
pub fn hessenberg(mut a: CMatrix) -> CMatrix {
    let n = a.nrows();
    if n < 3 {
        return a;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let norm: f64 = ((k + 1)..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + phase * |x| e_1, H = I - 2 v v^H / (v^H v)
        for i in (k + 1)..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] += phase * norm;
        let vnorm2: f64 = ((k + 1)..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // A <- H A
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in (k + 1)..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= beta;
            for i in (k + 1)..n {
                a[(i, j)] -= v[i] * s;
            }
        }
        // A <- A H
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (k + 1)..n {
                s += a[(i, j)] * v[j];
            }
            s *= beta;
            for j in (k + 1)..n {
                a[(i, j)] -= s * v[j].conj();
            }
        }
        for i in (k + 2)..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    a
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

/// Eigenvalues of a square complex matrix, in no particular order.
pub fn eig_all(m: &CMatrix) -> Result<Vec<Complex64>, EigError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(EigError::NotSquare { rows, cols });
    }
    if rows > MAX_DIM {
        return Err(EigError::TooLarge(rows));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigError::NonFinite);
    }
    let n = rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(balance(m.clone()));
    let eps = f64::EPSILON;
    let max_sweeps = 30 * n.max(10);
    let mut total = 0usize;
    let mut shifts: Vec<Complex64> = Vec::new();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];

    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // locate the start of the unreduced block ending at hi
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let mut diag = abs1(h[(lo, lo)]) + abs1(h[(lo - 1, lo - 1)]);
            if diag == 0.0 {
                // fall back to the neighbourhood when both diagonals vanish
                if lo + 1 <= hi {
                    diag += abs1(h[(lo + 1, lo)]);
                }
                if lo >= 2 {
                    diag += abs1(h[(lo - 1, lo - 2)]);
                }
            }
            if sub <= eps * diag || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > max_sweeps {
            let start = shifts.len().saturating_sub(8);
            return Err(EigError::NoConvergence {
                size: n,
                iterations: total,
                last_shifts: shifts[start..].to_vec(),
            });
        }

        let mu = if since_deflation % 10 == 0 {
            // exceptional shift breaks cycles
            h[(hi, hi)] + Complex64::new(0.75 * abs1(h[(hi, hi - 1)]), 0.0)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let tr2 = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
            let e1 = tr2 + disc;
            let e2 = tr2 - disc;
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        shifts.push(mu);

        // implicit single-shift sweep on rows/cols lo..=hi
        for k in lo..hi {
            let (x, y) = if k == lo {
                (h[(lo, lo)] - mu, h[(lo + 1, lo)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let jstart = if k == lo { lo } else { k - 1 };
            for j in jstart..=hi {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = c * t1 + s * t2;
                h[(k + 1, j)] = -s.conj() * t1 + c * t2;
            }
            let iend = (k + 2).min(hi);
            for i in lo..=iend {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = c * t1 + s.conj() * t2;
                h[(i, k + 1)] = -s * t1 + c * t2;
            }
            if k > lo {
                h[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(eig)
}

/// Sort by real part, then imaginary part.
pub fn sort_by_real(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Frobenius norm.
pub fn norm_fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        sort_by_real(&mut v);
        v
    }

    #[test]
    fn diagonal() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(4.0, 0.0), c(9.0, 0.0)]));
        let e = sorted(eig_all(&m).unwrap());
        for (x, y) in e.iter().zip([1.0, 4.0, 9.0]) {
            assert!((x - c(y, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn swap_matrix() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let e = sorted(eig_all(&m).unwrap());
        assert!((e[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_of_quadratic() {
        // z^2 - 2z + 5 = 0  ->  z = 1 +- 2i
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(-5.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let e = sorted(eig_all(&m).unwrap());
        assert!((e[0] - c(1.0, -2.0)).norm() < 1e-13);
        assert!((e[1] - c(1.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn jordan_block_and_zero_matrix() {
        let m = CMatrix::from_row_slice(3, 3, &[
            c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0),
        ]);
        for z in eig_all(&m).unwrap() {
            assert!((z - c(2.0, 0.0)).norm() < 1e-12);
        }
        let z = CMatrix::zeros(5, 5);
        assert!(eig_all(&z).unwrap().iter().all(|e| e.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(eig_all(&m), Err(EigError::NotSquare { .. })));
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(eig_all(&m), Err(EigError::NonFinite)));
    }

    #[test]
    fn random_matrices_match_characteristic_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[3usize, 8, 17, 40, 90] {
            let m = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let e = eig_all(&m).unwrap();
            assert_eq!(e.len(), n);
            let trace: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
            let sum: Complex64 = e.iter().sum();
            assert!((trace - sum).norm() < 1e-11 * n as f64, "n = {n}");
            // det(M - e I) should be tiny relative to |M|^n: check via LU pivot
            let scale = norm_fro(&m);
            for &z in e.iter().take(5) {
                let shifted = &m - CMatrix::identity(n, n) * z;
                let smin = shifted.clone().svd(false, false).singular_values.min();
                assert!(smin < 1e-12 * scale * n as f64, "n = {n}, smin = {smin}");
            }
        }
    }

    #[test]
    fn matches_nalgebra_schur() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 30;
        let m = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        let mine = sorted(eig_all(&m).unwrap());
        let theirs = sorted(m.clone().schur().eigenvalues().unwrap().iter().copied().collect());
        for (a, b) in mine.iter().zip(&theirs) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn badly_scaled_tridiagonal_is_balanced() {
        // sub-diagonal 1, super-diagonal 4: similar to the symmetric matrix
        // with off-diagonal 2, so the spectrum is real
        let n = 129;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            let k = 2.0 * (i as f64 - 64.0);
            m[(i, i)] = c(k * k, 0.0);
            if i + 1 < n {
                m[(i, i + 1)] = c(4.0, 0.0);
                m[(i + 1, i)] = c(1.0, 0.0);
            }
        }
        let e = eig_all(&m).unwrap();
        for z in &e {
            assert!(z.im.abs() < 1e-8 * (1.0 + z.re.abs()), "{z}");
        }
    }
}
