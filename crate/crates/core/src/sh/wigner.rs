//! Wigner-D rotation of spherical-harmonic coefficients.
//!
//! With ZYZ Euler angles, `R = R_z(α) R_y(β) R_z(γ)`, and
//! `D^l_{m'm}(R) = e^{-im'α} d^l_{m'm}(β) e^{-imγ}`, the harmonics satisfy
//! `Y^{l,m}(Rᵀn) = Σ_{m'} D^l_{m'm}(R) Y^{l,m'}(n)`.

use nalgebra::Matrix3;
use num_complex::Complex64;

use super::{n_coeffs, SphCoeffField};
use crate::error::Result;
use crate::geometry::{check_rotation, euler_zyz};

/// Wigner small-d element `d^l_{m'm}(β)` via Jacobi polynomials.
pub fn wigner_small_d(l: usize, mp: i64, m: i64, beta: f64) -> f64 {
    let j = l as i64;
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    d_from_half_angles(j, mp, m, c, s, beta.cos())
}

fn d_from_half_angles(j: i64, mp: i64, m: i64, c: f64, s: f64, x: f64) -> f64 {
    let k = (j + m).min(j - m).min(j + mp).min(j - mp);
    let (a, lambda) = if k == j + m {
        (mp - m, mp - m)
    } else if k == j - m || k == j + mp {
        (m - mp, 0)
    } else {
        (mp - m, mp - m)
    };
    let b = 2 * j - 2 * k - a;
    let sign = if lambda.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    let norm = (binomial(2 * j - k, k + a) / binomial(k + b, b)).sqrt();
    sign * norm * s.powi(a as i32) * c.powi(b as i32) * jacobi(k as usize, a as f64, b as f64, x)
}

fn binomial(n: i64, k: i64) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` by three-term recurrence.
fn jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Wigner-D blocks `l = 0 ..= lmax` for one rotation, block `l` stored row-major
/// as `(2l+1) × (2l+1)` with rows `m'` and columns `m`, both from `-l`.
#[derive(Debug, Clone)]
pub struct WignerD {
    pub lmax: usize,
    blocks: Vec<Vec<Complex64>>,
}

impl WignerD {
    pub fn new(r: &Matrix3<f64>, lmax: usize) -> Result<Self> {
        check_rotation(r)?;
        let (alpha, beta, gamma) = euler_zyz(r);
        Ok(Self::from_euler(alpha, beta, gamma, lmax))
    }

    pub fn from_euler(alpha: f64, beta: f64, gamma: f64, lmax: usize) -> Self {
        let (c, s, x) = ((beta / 2.0).cos(), (beta / 2.0).sin(), beta.cos());
        let top = lmax as i64;
        let pa: Vec<Complex64> = (-top..=top)
            .map(|m| Complex64::from_polar(1.0, -(m as f64) * alpha))
            .collect();
        let pg: Vec<Complex64> = (-top..=top)
            .map(|m| Complex64::from_polar(1.0, -(m as f64) * gamma))
            .collect();
        let blocks = (0..=lmax)
            .map(|l| {
                let j = l as i64;
                let w = 2 * l + 1;
                let mut b = vec![Complex64::new(0.0, 0.0); w * w];
                for mp in -j..=j {
                    for m in -j..=j {
                        let d = d_from_half_angles(j, mp, m, c, s, x);
                        b[(mp + j) as usize * w + (m + j) as usize] =
                            pa[(mp + top) as usize] * pg[(m + top) as usize] * d;
                    }
                }
                b
            })
            .collect();
        Self { lmax, blocks }
    }

    pub fn get(&self, l: usize, mp: i64, m: i64) -> Complex64 {
        let j = l as i64;
        self.blocks[l][(mp + j) as usize * (2 * l + 1) + (m + j) as usize]
    }

    /// Coefficients of `n ↦ f(Rᵀn)`, writing into `out`.
    pub fn apply_into(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        let lmax = ((coeffs.len() as f64).sqrt() as usize)
            .saturating_sub(1)
            .min(self.lmax);
        for l in 0..=lmax {
            let w = 2 * l + 1;
            let base = l * l;
            let block = &self.blocks[l];
            for r in 0..w {
                let row = &block[r * w..(r + 1) * w];
                let mut acc = Complex64::new(0.0, 0.0);
                for (d, c) in row.iter().zip(&coeffs[base..base + w]) {
                    acc += d * c;
                }
                out[base + r] = acc;
            }
        }
    }

    pub fn apply(&self, coeffs: &SphCoeffField) -> SphCoeffField {
        let mut out = vec![Complex64::new(0.0, 0.0); n_coeffs(coeffs.lmax)];
        self.apply_into(&coeffs.values, &mut out);
        SphCoeffField {
            lmax: coeffs.lmax,
            values: out,
        }
    }
}

/// Coefficients of `n ↦ f(Rᵀn)`.
pub fn wigner_rotate(coeffs: &SphCoeffField, r: &Matrix3<f64>) -> Result<SphCoeffField> {
    let d = WignerD::new(r, coeffs.lmax)?;
    Ok(d.apply(coeffs))
}
