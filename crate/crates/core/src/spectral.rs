//! Operator matrices for fixed order `m` in the normalized Legendre basis
//! `P̄_l^m, l = |m| ..= lmax`, and the spheroidal eigenproblems built from them.
//!
//! * SWE: `(ρ² M₁ + Λ) d = λ̃ d`, real symmetric with two parity blocks.
//! * GSWE: `(Λ + iρ M₂) c = λ̃ c`, complex symmetric. Conjugating by
//!   `diag(i^j)` turns it into a real tridiagonal matrix, whose spectrum is
//!   computed from the real Schur form; eigenvectors follow by inverse iteration.
//!
//! `S^{l,m}_ρ` solves `((1-x²)y')' + (λ̃ - ρ²x² - m²/(1-x²)) y = 0` and
//! `GS^{l,m}_ρ` solves `((1-x²)y')' + (λ̃ - iρx - m²/(1-x²)) y = 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{real_matrix_eigenvalues, symmetric_tridiagonal_eigen, tridiagonal_solve};
use crate::sh::{legendre_column, recurrence_x2_normalized, x_coupling};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    M1,
    M2,
    Lambda,
}

/// Banded symmetric operator of one order `m`.
///
/// `offset` is the distance of the off-diagonal band (2 for `M1`, 1 for `M2`,
/// 0 when there is none); `off[j]` couples rows `j` and `j + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiagOperator {
    pub m: i64,
    pub lmax: usize,
    pub kind: OperatorKind,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub offset: usize,
}

impl TriDiagOperator {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut a = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag));
        for (j, v) in self.off.iter().enumerate() {
            a[(j, j + self.offset)] = *v;
            a[(j + self.offset, j)] = *v;
        }
        debug_assert_eq!(a.nrows(), n);
        a
    }
}

fn check_order(m: i64, lmax: usize) -> Result<usize> {
    let am = m.unsigned_abs() as usize;
    if am > lmax {
        return Err(Error::Domain(format!("|m| = {am} exceeds lmax = {lmax}")));
    }
    Ok(am)
}

/// Matrix of multiplication by `x²`.
pub fn build_m1(m: i64, lmax: usize) -> Result<TriDiagOperator> {
    let am = check_order(m, lmax)?;
    let n = lmax - am + 1;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(2));
    for l in am..=lmax {
        let r = recurrence_x2_normalized(l, am as i64)?;
        diag.push(r.eta);
        if l + 2 <= lmax {
            off.push(r.zeta);
        }
    }
    Ok(TriDiagOperator {
        m,
        lmax,
        kind: OperatorKind::M1,
        diag,
        off,
        offset: 2,
    })
}

/// Matrix of multiplication by `x`; the caller scales it by `iρ`.
pub fn build_m2(m: i64, lmax: usize) -> Result<TriDiagOperator> {
    let am = check_order(m, lmax)?;
    let n = lmax - am + 1;
    let off = ((am + 1)..=lmax).map(|l| x_coupling(l, am)).collect();
    Ok(TriDiagOperator {
        m,
        lmax,
        kind: OperatorKind::M2,
        diag: vec![0.0; n],
        off,
        offset: 1,
    })
}

/// Diagonal `l(l+1)`.
pub fn build_lambda(m: i64, lmax: usize) -> Result<TriDiagOperator> {
    let am = check_order(m, lmax)?;
    let diag = (am..=lmax).map(|l| (l * (l + 1)) as f64).collect();
    Ok(TriDiagOperator {
        m,
        lmax,
        kind: OperatorKind::Lambda,
        diag,
        off: Vec::new(),
        offset: 0,
    })
}

/// Eigenpairs for one `(m, ρ)`; column `k` of `vectors` belongs to
/// `eigenvalues[k]`, labelled `l = |m| + k`.
#[derive(Debug, Clone)]
pub struct SpheroidalEigensystem {
    pub m: i64,
    pub rho: f64,
    pub lmax: usize,
    pub eigenvalues: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub is_real: Vec<bool>,
    /// Bilinear self-products `cᵀc` (no conjugation); 1 for the SWE.
    pub gram: Vec<Complex64>,
    pub residual: f64,
    /// Some `cᵀc` is below 1e-8: the eigenbasis is close to defective.
    pub near_defective: bool,
}

impl SpheroidalEigensystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

const RESIDUAL_LIMIT: f64 = 1e-10;

/// Eigenvalues `λ̃` and unit eigenvectors of `ρ²M₁ + Λ`.
pub fn swe_eigensystem(m: i64, rho: f64, lmax: usize) -> Result<SpheroidalEigensystem> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be non-negative")));
    }
    let m1 = build_m1(m, lmax)?;
    let lam = build_lambda(m, lmax)?;
    let n = m1.size();
    let r2 = rho * rho;
    let mut vals = vec![0.0; n];
    let mut vecs = DMatrix::<f64>::zeros(n, n);
    let mut order = Vec::with_capacity(n);
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..n).step_by(2).collect();
        if idx.is_empty() {
            continue;
        }
        let diag: Vec<f64> = idx.iter().map(|&j| r2 * m1.diag[j] + lam.diag[j]).collect();
        let off: Vec<f64> = idx.iter().skip(1).map(|&j| r2 * m1.off[j - 2]).collect();
        let (ev, evec) = symmetric_tridiagonal_eigen(&diag, &off)?;
        for (k, v) in ev.into_iter().enumerate() {
            order.push((v, parity, k, idx.clone(), evec.column(k).into_owned()));
        }
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (col, (v, _, _, idx, evec)) in order.into_iter().enumerate() {
        vals[col] = v;
        for (i, &j) in idx.iter().enumerate() {
            vecs[(j, col)] = evec[i];
        }
    }
    let mut vectors = vecs.map(|v| Complex64::new(v, 0.0));
    fix_signs(&mut vectors);
    let a = (m1.to_dense() * r2 + lam.to_dense()).map(|v| Complex64::new(v, 0.0));
    let eigenvalues: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let residual = max_residual(&a, &eigenvalues, &vectors);
    if residual > RESIDUAL_LIMIT * (1.0 + r2 + (lmax * lmax) as f64) {
        return Err(Error::Convergence(format!(
            "SWE residual {residual:.3e} at m={m}, rho={rho}"
        )));
    }
    Ok(SpheroidalEigensystem {
        m,
        rho,
        lmax,
        is_real: vec![true; n],
        gram: vec![Complex64::new(1.0, 0.0); n],
        eigenvalues,
        vectors,
        residual,
        near_defective: false,
    })
}

fn fix_signs(v: &mut DMatrix<Complex64>) {
    for mut col in v.column_iter_mut() {
        let big = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if let Some(first) = col.iter().find(|c| c.norm() > 1e-8 * big).copied() {
            let phase = first.conj() / first.norm();
            for c in col.iter_mut() {
                *c *= phase;
            }
        }
    }
}

fn max_residual(a: &DMatrix<Complex64>, vals: &[Complex64], vecs: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for (k, lam) in vals.iter().enumerate() {
        let v = vecs.column(k);
        let r = a * v - v * *lam;
        worst = worst.max(r.iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    worst
}

/// Complex matrix `Λ + iρM₂` as (sub, diag, sup) bands.
fn gswe_bands(m: i64, rho: f64, lmax: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let m2 = build_m2(m, lmax)?;
    let lam = build_lambda(m, lmax)?;
    let diag = lam.diag.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let off = m2
        .off
        .iter()
        .map(|&v| Complex64::new(0.0, rho * v))
        .collect();
    Ok((diag, off))
}

/// Eigenvalues `λ̃` and eigenvectors of `Λ + iρM₂`.
///
/// Eigenvalues are sorted by real part, conjugate pairs with positive
/// imaginary part first. Vectors have unit Euclidean norm and a real positive
/// leading coefficient.
pub fn gswe_eigensystem(m: i64, rho: f64, lmax: usize) -> Result<SpheroidalEigensystem> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be non-negative")));
    }
    let (diag, off) = gswe_bands(m, rho, lmax)?;
    let n = diag.len();
    // diag(i^j)⁻¹ (Λ + iρM₂) diag(i^j) has real entries -ρa above and ρa below
    let mut real = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        real[(j, j)] = diag[j].re;
        if j + 1 < n {
            real[(j, j + 1)] = -off[j].im;
            real[(j + 1, j)] = off[j].im;
        }
    }
    let mut vals = real_matrix_eigenvalues(real)?;
    let scale = 1.0 + diag.last().map(|d| d.re).unwrap_or(0.0) + rho;
    let imag_tol = 1e-12 * scale;
    for v in vals.iter_mut() {
        if v.im.abs() < imag_tol {
            v.im = 0.0;
        }
    }
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));

    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (k, lam) in vals.iter_mut().enumerate() {
        let v = inverse_iteration(&diag, &off, *lam, scale)?;
        // complex-symmetric Rayleigh quotient sharpens the eigenvalue
        let av = apply_bands(&diag, &off, &v);
        let num: Complex64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        let den: Complex64 = v.iter().map(|a| a * a).sum();
        if den.norm() > 1e-6 {
            let refined = num / den;
            if (refined - *lam).norm() < 1e-8 * scale {
                *lam = if lam.im == 0.0 {
                    Complex64::new(refined.re, 0.0)
                } else {
                    refined
                };
            }
        }
        for (j, c) in v.into_iter().enumerate() {
            vectors[(j, k)] = c;
        }
    }
    fix_signs(&mut vectors);
    let gram: Vec<Complex64> = (0..n)
        .map(|k| vectors.column(k).iter().map(|c| c * c).sum())
        .collect();
    let near_defective = gram.iter().any(|g| g.norm() < 1e-8);
    let mut dense = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        dense[(j, j)] = diag[j];
        if j + 1 < n {
            dense[(j, j + 1)] = off[j];
            dense[(j + 1, j)] = off[j];
        }
    }
    let residual = max_residual(&dense, &vals, &vectors);
    let is_real = vals.iter().map(|v| v.im == 0.0).collect();
    Ok(SpheroidalEigensystem {
        m,
        rho,
        lmax,
        eigenvalues: vals,
        vectors,
        is_real,
        gram,
        residual,
        near_defective,
    })
}

fn apply_bands(diag: &[Complex64], off: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    (0..n)
        .map(|j| {
            let mut s = diag[j] * v[j];
            if j > 0 {
                s += off[j - 1] * v[j - 1];
            }
            if j + 1 < n {
                s += off[j] * v[j + 1];
            }
            s
        })
        .collect()
}

fn inverse_iteration(
    diag: &[Complex64],
    off: &[Complex64],
    lam: Complex64,
    scale: f64,
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let shift = lam + Complex64::new(1e-13 * scale, 1e-13 * scale);
    let d: Vec<Complex64> = diag.iter().map(|v| v - shift).collect();
    let mut v: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(1.0 + 0.1 * j as f64, 0.3))
        .collect();
    for _ in 0..3 {
        let w = match tridiagonal_solve(off, &d, off, &v) {
            Ok(w) => w,
            Err(_) => {
                // exact shift hit: perturb further
                let d2: Vec<Complex64> = d.iter().map(|x| x - 1e-10 * scale).collect();
                tridiagonal_solve(off, &d2, off, &v)?
            }
        };
        let nrm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::Convergence(format!(
                "inverse iteration at λ = {lam}"
            )));
        }
        v = w.into_iter().map(|c| c / nrm).collect();
    }
    Ok(v)
}

/// Internal truncation for evaluating `S`/`GS` of degree `l`: at least eight
/// extra degrees, growing with `ρ` until the coefficient tail is negligible.
fn synthesis_degree(l: usize, rho: f64) -> usize {
    l + 8 + (2.0 * rho).ceil() as usize
}

fn legendre_series(m: usize, coeffs: &[Complex64], x: f64) -> Complex64 {
    let col = legendre_column(m, m + coeffs.len() - 1, x);
    coeffs.iter().zip(&col).map(|(c, p)| c * p).sum()
}

fn degree_index(l: usize, m: i64) -> Result<usize> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(Error::Domain(format!("|m| = {am} exceeds l = {l}")));
    }
    Ok(l - am)
}

fn check_x(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    Ok(())
}

/// Spheroidal wave function `S^{l,m}_ρ(x)`, unit L² norm on [-1, 1].
pub fn spheroidal_wave(l: usize, m: i64, rho: f64, x: f64) -> Result<f64> {
    check_x(x)?;
    let k = degree_index(l, m)?;
    let es = swe_eigensystem(m, rho, synthesis_degree(l, rho))?;
    Ok(legendre_series(m.unsigned_abs() as usize, &es.vector(k), x).re)
}

/// Generalized spheroidal wave function `GS^{l,m}_ρ(x)`, unit L² norm.
pub fn gen_spheroidal_wave(l: usize, m: i64, rho: f64, x: f64) -> Result<Complex64> {
    check_x(x)?;
    let k = degree_index(l, m)?;
    let es = gswe_eigensystem(m, rho, synthesis_degree(l, rho))?;
    Ok(legendre_series(m.unsigned_abs() as usize, &es.vector(k), x))
}

/// Evaluator for one eigenfunction, avoiding repeated eigensolves.
#[derive(Debug, Clone)]
pub struct SpheroidalFunction {
    pub m: i64,
    pub eigenvalue: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl SpheroidalFunction {
    pub fn swe(l: usize, m: i64, rho: f64) -> Result<Self> {
        let k = degree_index(l, m)?;
        let es = swe_eigensystem(m, rho, synthesis_degree(l, rho))?;
        Ok(Self {
            m,
            eigenvalue: es.eigenvalues[k],
            coeffs: es.vector(k),
        })
    }

    pub fn gswe(l: usize, m: i64, rho: f64) -> Result<Self> {
        let k = degree_index(l, m)?;
        let es = gswe_eigensystem(m, rho, synthesis_degree(l, rho))?;
        Ok(Self {
            m,
            eigenvalue: es.eigenvalues[k],
            coeffs: es.vector(k),
        })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        legendre_series(self.m.unsigned_abs() as usize, &self.coeffs, x)
    }
}

/// Collision points of GSWE eigenvalues for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPointList {
    pub m: i64,
    pub points: Vec<f64>,
    pub scan_resolution: f64,
}

/// Number of eigenvalues tracked by the branch scan; the truncation is
/// chosen far larger so that the tracked part of the spectrum is converged.
const TRACKED: usize = 12;

fn branch_truncation(m: i64, rho_max: f64) -> usize {
    m.unsigned_abs() as usize + 2 * TRACKED + 16 + (2.0 * rho_max).ceil() as usize
}

fn complex_count(m: i64, rho: f64, lmax: usize) -> Result<usize> {
    let es = gswe_eigensystem(m, rho, lmax)?;
    Ok(es
        .eigenvalues
        .iter()
        .take(TRACKED)
        .filter(|v| v.im != 0.0)
        .count())
}

/// Scan `ρ ∈ (0, rho_max]` for onsets of complex-conjugate pairs among the
/// lowest eigenvalues, refining each by bisection to `resolution`.
pub fn detect_branch_points(m: i64, rho_max: f64, resolution: f64) -> Result<BranchPointList> {
    let am = m.unsigned_abs() as f64;
    if !(rho_max > am + 1.0) {
        return Err(Error::Domain(format!(
            "rho_max = {rho_max} must exceed |m|+1 = {}",
            am + 1.0
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::Domain(format!(
            "resolution = {resolution} must be positive"
        )));
    }
    let lmax = branch_truncation(m, rho_max);
    let step = 0.05f64.max(resolution);
    let mut points = Vec::new();
    let mut prev_rho = 0.0;
    let mut prev = complex_count(m, 0.0, lmax)?;
    let mut rho = step;
    while prev_rho < rho_max {
        let r = rho.min(rho_max);
        let cnt = complex_count(m, r, lmax)?;
        if cnt > prev {
            let (mut lo, mut hi) = (prev_rho, r);
            while hi - lo > resolution {
                let mid = 0.5 * (lo + hi);
                if complex_count(m, mid, lmax)? > prev {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            points.push(0.5 * (lo + hi));
        }
        prev = cnt;
        prev_rho = r;
        rho += step;
    }
    Ok(BranchPointList {
        m,
        points,
        scan_resolution: resolution,
    })
}

/// Smallest distance between two of the tracked eigenvalues at `rho`.
pub fn min_eigenvalue_gap(m: i64, rho: f64, lmax: usize) -> Result<f64> {
    let es = gswe_eigensystem(m, rho, lmax)?;
    let v = &es.eigenvalues[..TRACKED.min(es.len())];
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            best = best.min((v[i] - v[j]).norm());
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveOperator {
    Swe,
    Gswe,
}

/// One row of an eigenvalue-curve table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub m: i64,
    pub index: usize,
    pub rho: f64,
    pub value: Complex64,
}

/// Eigenvalue curves `λ̃(ρ)` on `n_rho + 1` equispaced samples of
/// `[0, rho_max]`, keeping the lowest `n_curves`. Curves are followed by
/// matching each sample to the nearest eigenvalue of the previous sample.
pub fn eigenvalue_curves(
    op: CurveOperator,
    m: i64,
    rho_max: f64,
    n_rho: usize,
    n_curves: usize,
) -> Result<Vec<CurveSample>> {
    let lmax =
        m.unsigned_abs() as usize + 2 * n_curves.max(1) + 16 + (2.0 * rho_max).ceil() as usize;
    let mut out = Vec::new();
    let mut prev: Option<Vec<Complex64>> = None;
    for s in 0..=n_rho {
        let rho = rho_max * s as f64 / n_rho.max(1) as f64;
        let es = match op {
            CurveOperator::Swe => swe_eigensystem(m, rho, lmax)?,
            CurveOperator::Gswe => gswe_eigensystem(m, rho, lmax)?,
        };
        let pool: Vec<Complex64> = es.eigenvalues.iter().take(n_curves + 4).copied().collect();
        let current: Vec<Complex64> = match &prev {
            None => pool.iter().take(n_curves).copied().collect(),
            Some(p) => {
                let mut used = vec![false; pool.len()];
                p.iter()
                    .map(|old| {
                        let (j, _) = pool
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| !used[*j])
                            .min_by(|a, b| (a.1 - old).norm().total_cmp(&(b.1 - old).norm()))
                            .expect("pool larger than tracked set");
                        used[j] = true;
                        pool[j]
                    })
                    .collect()
            }
        };
        for (index, value) in current.iter().enumerate() {
            out.push(CurveSample {
                m,
                index,
                rho,
                value: *value,
            });
        }
        prev = Some(current);
    }
    Ok(out)
}

pub const CURVE_CSV_HEADER: &str = "m,l_index,rho,re,im";

pub fn write_curves_csv<W: Write>(mut w: W, samples: &[CurveSample]) -> std::io::Result<()> {
    writeln!(w, "{CURVE_CSV_HEADER}")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{:.10},{:.12e},{:.12e}",
            s.m, s.index, s.rho, s.value.re, s.value.im
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use crate::sh::assoc_legendre;

    #[test]
    fn m1_examples() {
        let m1 = build_m1(0, 2).unwrap();
        let want = [1.0 / 3.0, 3.0 / 5.0, 11.0 / 21.0];
        for (a, b) in m1.diag.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
        // x² P̄_0 = (1/3) P̄_0 + ζ̄ P̄_2 with ζ̄ = 2/(3√5)
        assert!((m1.off[0] - 2.0 / (3.0 * 5f64.sqrt())).abs() < 1e-15);
        let (xs, ws) = gauss_legendre(30);
        for m in 0..4i64 {
            let op = build_m1(m, 10).unwrap().to_dense();
            let am = m as usize;
            for a in 0..op.nrows() {
                for b in 0..op.nrows() {
                    let q: f64 = xs
                        .iter()
                        .zip(&ws)
                        .map(|(&x, w)| {
                            w * x
                                * x
                                * assoc_legendre(am + a, m, x).unwrap()
                                * assoc_legendre(am + b, m, x).unwrap()
                        })
                        .sum();
                    assert!((op[(a, b)] - q).abs() < 1e-12);
                    assert!((op[(a, b)] - op[(b, a)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn m2_examples() {
        let m2 = build_m2(0, 1).unwrap();
        let d = m2.to_dense();
        assert!((d[(0, 1)] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((d[(1, 0)] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let m2 = build_m2(2, 9).unwrap();
        assert!(m2.diag.iter().all(|&v| v == 0.0));
        let d = m2.to_dense();
        assert!((&d - d.transpose()).abs().max() < 1e-15);
        let (xs, ws) = gauss_legendre(20);
        for a in 0..d.nrows() {
            for b in 0..d.nrows() {
                let q: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, w)| {
                        w * x
                            * assoc_legendre(2 + a, 2, x).unwrap()
                            * assoc_legendre(2 + b, 2, x).unwrap()
                    })
                    .sum();
                assert!((d[(a, b)] - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swe_at_zero_is_legendre() {
        let es = swe_eigensystem(2, 0.0, 9).unwrap();
        for (k, v) in es.eigenvalues.iter().enumerate() {
            let l = (2 + k) as f64;
            assert!((v.re - l * (l + 1.0)).abs() < 1e-12);
            for j in 0..es.len() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((es.vectors[(j, k)].re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swe_parity_and_continuity() {
        let es = swe_eigensystem(1, 3.0, 14).unwrap();
        for k in 0..es.len() {
            for j in 0..es.len() {
                if (j + k) % 2 == 1 {
                    assert_eq!(es.vectors[(j, k)].norm(), 0.0);
                }
            }
        }
        let a = swe_eigensystem(0, 0.0, 12).unwrap();
        let b = swe_eigensystem(0, 1e-6, 12).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).norm() < 1e-4);
        }
        for w in es.eigenvalues.windows(2) {
            assert!(w[1].re > w[0].re);
        }
    }

    #[test]
    fn gswe_basic_properties() {
        let es = gswe_eigensystem(0, 0.0, 8).unwrap();
        for (k, v) in es.eigenvalues.iter().enumerate() {
            assert_eq!(v.im, 0.0);
            assert!((v.re - (k * (k + 1)) as f64).abs() < 1e-12);
        }
        let es = gswe_eigensystem(0, 0.5, 12).unwrap();
        assert!(es.is_real.iter().all(|&r| r));
        for rho in [0.3, 2.0, 7.5] {
            let es = gswe_eigensystem(1, rho, 14).unwrap();
            let trace: Complex64 = es.eigenvalues.iter().sum();
            let want: f64 = (1..=14).map(|l| (l * (l + 1)) as f64).sum();
            assert!((trace - want).norm() < 1e-8);
            assert!(es.residual < 1e-10, "residual {}", es.residual);
            for v in &es.eigenvalues {
                if v.im != 0.0 {
                    assert!(es.eigenvalues.iter().any(|w| (w - v.conj()).norm() < 1e-9));
                }
                assert!(v.re >= 0.0);
            }
        }
    }

    #[test]
    fn gswe_bi_orthogonal() {
        let es = gswe_eigensystem(0, 4.0, 16).unwrap();
        for a in 0..es.len() {
            for b in 0..es.len() {
                if a != b {
                    let s: Complex64 = es
                        .vectors
                        .column(a)
                        .iter()
                        .zip(es.vectors.column(b).iter())
                        .map(|(x, y)| x * y)
                        .sum();
                    assert!(s.norm() < 1e-9, "a={a} b={b} {s}");
                }
            }
        }
    }

    #[test]
    fn wave_functions_at_zero_are_legendre() {
        for x in [-0.8, 0.1, 0.6] {
            let s = spheroidal_wave(3, 1, 0.0, x).unwrap();
            assert!((s - assoc_legendre(3, 1, x).unwrap()).abs() < 1e-12);
            let g = gen_spheroidal_wave(4, -2, 0.0, x).unwrap();
            assert!((g.re - assoc_legendre(4, 2, x).unwrap()).abs() < 1e-12 && g.im.abs() < 1e-12);
        }
    }

    #[test]
    fn wave_functions_orthonormal() {
        let (xs, ws) = gauss_legendre(60);
        let fs: Vec<SpheroidalFunction> = (1..=5)
            .map(|l| SpheroidalFunction::swe(l, 1, 3.0).unwrap())
            .collect();
        for (a, fa) in fs.iter().enumerate() {
            for (b, fb) in fs.iter().enumerate() {
                let q: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, w)| w * fa.eval(x).re * fb.eval(x).re)
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((q - want).abs() < 1e-8);
            }
        }
        let gs: Vec<SpheroidalFunction> = (0..=4)
            .map(|l| SpheroidalFunction::gswe(l, 0, 2.0).unwrap())
            .collect();
        for (a, fa) in gs.iter().enumerate() {
            for (b, fb) in gs.iter().enumerate() {
                if a != b {
                    let q: Complex64 = xs
                        .iter()
                        .zip(&ws)
                        .map(|(&x, w)| fa.eval(x) * fb.eval(x) * *w)
                        .sum();
                    assert!(q.norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn branch_points_basic() {
        let bp = detect_branch_points(0, 12.0, 1e-6).unwrap();
        assert!(!bp.points.is_empty());
        assert!(bp.points.iter().all(|&p| p > 1.0));
        assert!(bp.points.windows(2).all(|w| w[1] > w[0]));
        assert!(detect_branch_points(2, 2.5, 1e-3).is_err());
    }

    #[test]
    fn curves_csv_schema() {
        let s = eigenvalue_curves(CurveOperator::Gswe, 0, 1.0, 2, 3).unwrap();
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "m,l_index,rho,re,im");
        assert_eq!(lines.len(), 1 + 3 * 3);
        let f: Vec<&str> = lines[3].split(',').collect();
        assert_eq!(&f[..3], &["0", "2", "0.0000000000"]);
        assert!((f[3].parse::<f64>().unwrap() - 6.0).abs() < 1e-12);
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 5));
    }
}
