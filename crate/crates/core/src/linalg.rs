//! Small dense and tridiagonal kernels used by the spectral solvers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigen-decomposition of a real symmetric tridiagonal matrix by implicit QL.
///
/// `diag` has length n, `off[i]` couples rows i and i+1. Returns eigenvalues in
/// ascending order and the matching orthonormal eigenvectors as columns.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = DMatrix::<f64>::identity(n, n);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence(format!(
                    "QL iteration stalled at row {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok((vals, vecs))
}

/// Solve a complex tridiagonal system with partial pivoting.
///
/// `sub[i]` is entry (i+1, i), `diag[i]` is (i, i), `sup[i]` is (i, i+1).
pub fn tridiagonal_solve(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![zero; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    let scale = diag
        .iter()
        .chain(sub)
        .chain(sup)
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    for i in 0..n.saturating_sub(1) {
        if d[i].norm() >= dl[i].norm() {
            if d[i].norm() == 0.0 {
                return Err(Error::Singular(format!("zero pivot at row {i}")));
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] = b[i + 1] - f * b[i];
            dl[i] = zero;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du[i + 1];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] = b[i + 1] - f * b[i];
        }
    }
    if d[n - 1].norm() <= f64::EPSILON * scale * 1e-3 {
        return Err(Error::Singular(format!("zero pivot at row {}", n - 1)));
    }
    let mut x = vec![zero; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Ok(x)
}

/// Matrix exponential by scaling and squaring with a (6,6) Padé approximant.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    if norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as i32;
    }
    let scaled = a.scale(1.0 / 2f64.powi(s));
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut num = id.clone();
    let mut den = id.clone();
    let mut pow = id;
    for (k, c) in C.iter().enumerate().skip(1) {
        pow = &pow * &scaled;
        num += pow.scale(*c);
        den += pow.scale(if k % 2 == 0 { *c } else { -*c });
    }
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is nonsingular for ‖A‖ ≤ 1/2");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Eigenvalues of a real square matrix (real Schur form).
pub fn real_matrix_eigenvalues(a: DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Convergence(format!("real Schur decomposition of order {n}")))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}
