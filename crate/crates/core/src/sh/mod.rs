//! Spherical harmonics on S².
//!
//! Conventions: `P̄_l^m` is the associated Legendre function normalized to unit
//! L² norm on [-1, 1], symmetric in the sign of `m`, without a Condon-Shortley
//! phase. The phase lives in the harmonic instead:
//!
//! `Y^{l,m}(β, γ) = ε_m / √(2π) · P̄_l^m(cos β) · e^{imγ}`, `ε_m = (-1)^m` for
//! `m ≥ 0` and `1` otherwise.
//!
//! This coincides with the usual complex Condon-Shortley harmonics, which is
//! the convention the Wigner-D matrices in [`wigner`] are written for.

mod sampling;
mod transform;
pub mod wigner;

pub use sampling::{icosahedral_mesh, OrientationSampling, SphereMesh};
pub use transform::{forward_transform, inverse_transform, TransformPlan};
pub use wigner::{wigner_rotate, WignerD};

use nalgebra::Vector3;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Degree and order of a spherical harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SHIndex {
    pub l: usize,
    pub m: i64,
}

impl SHIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::Domain(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(Self { l, m })
    }

    /// Flat index `l² + l + m`.
    pub fn flat(self) -> usize {
        sh_index(self.l, self.m)
    }

    pub fn from_flat(k: usize) -> Self {
        let l = (k as f64).sqrt() as usize;
        let l = if (l + 1) * (l + 1) <= k {
            l + 1
        } else if l * l > k {
            l - 1
        } else {
            l
        };
        Self {
            l,
            m: k as i64 - (l * l + l) as i64,
        }
    }
}

/// Flat index `l² + l + m`.
#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients up to and including degree `lmax`.
#[inline]
pub fn n_coeffs(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Coefficients of one fixed order `m`, for `l = |m| ..= lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphCoeffVector {
    pub m: i64,
    pub lmax: usize,
    pub values: Vec<Complex64>,
}

impl SphCoeffVector {
    pub fn zeros(m: i64, lmax: usize) -> Self {
        let n = block_len(m, lmax);
        Self {
            m,
            lmax,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_values(m: i64, lmax: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != block_len(m, lmax) {
            return Err(Error::Shape(format!(
                "order {m} up to degree {lmax} needs {} values, got {}",
                block_len(m, lmax),
                values.len()
            )));
        }
        Ok(Self { m, lmax, values })
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Length of the order-`m` block when truncating at `lmax`.
#[inline]
pub fn block_len(m: i64, lmax: usize) -> usize {
    (lmax + 1).saturating_sub(m.unsigned_abs() as usize)
}

/// Coefficients over all `(l, m)` with `l ≤ lmax`, stored at [`sh_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct SphCoeffField {
    pub lmax: usize,
    pub values: Vec<Complex64>,
}

impl SphCoeffField {
    pub fn zeros(lmax: usize) -> Self {
        Self {
            lmax,
            values: vec![Complex64::new(0.0, 0.0); n_coeffs(lmax)],
        }
    }

    pub fn from_values(lmax: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != n_coeffs(lmax) {
            return Err(Error::Shape(format!(
                "degree {lmax} needs {} coefficients, got {}",
                n_coeffs(lmax),
                values.len()
            )));
        }
        Ok(Self { lmax, values })
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.values[sh_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        self.values[sh_index(l, m)] = v;
    }

    /// Extract the order-`m` block.
    pub fn block(&self, m: i64) -> SphCoeffVector {
        let l0 = m.unsigned_abs() as usize;
        let values = (l0..=self.lmax).map(|l| self.get(l, m)).collect();
        SphCoeffVector {
            m,
            lmax: self.lmax,
            values,
        }
    }

    pub fn set_block(&mut self, v: &SphCoeffVector) {
        let l0 = v.m.unsigned_abs() as usize;
        for (j, x) in v.values.iter().enumerate() {
            self.set(l0 + j, v.m, *x);
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Evaluate the expansion at a unit direction.
    pub fn eval(&self, dir: &Vector3<f64>) -> Complex64 {
        let y = sh_all(self.lmax, dir);
        self.values.iter().zip(&y).map(|(c, y)| c * y).sum()
    }
}

fn check_order(l: usize, m: i64) -> Result<usize> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(Error::Domain(format!("|m| = {am} exceeds l = {l}")));
    }
    Ok(am)
}

/// Normalized associated Legendre function `P̄_l^m(x)`.
pub fn assoc_legendre(l: usize, m: i64, x: f64) -> Result<f64> {
    let am = check_order(l, m)?;
    if !(-1.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    Ok(legendre_column(am, l, x)[l - am])
}

/// `P̄_l^m(x)` for `l = m ..= lmax` by the normalized upward recurrence.
pub fn legendre_column(m: usize, lmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1 - m);
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..=m {
        let k = k as f64;
        pmm *= ((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    out.push(pmm);
    if lmax == m {
        return out;
    }
    let mut prev = pmm;
    let mut cur = x * ((2 * m + 3) as f64).sqrt() * pmm;
    out.push(cur);
    let mf = m as f64;
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

#[inline]
fn epsilon(m: i64) -> f64 {
    if m >= 0 && m % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `Y^{l,m}(β, γ)` with polar angle `β` and azimuth `γ`.
pub fn spherical_harmonic(l: usize, m: i64, beta: f64, gamma: f64) -> Result<Complex64> {
    let am = check_order(l, m)?;
    let p = legendre_column(am, l, beta.cos())[l - am];
    let scale = epsilon(m) * p / (2.0 * PI).sqrt();
    Ok(Complex64::from_polar(scale, m as f64 * gamma))
}

/// All harmonics up to `lmax` at a unit direction, at [`sh_index`] positions.
pub fn sh_all(lmax: usize, dir: &Vector3<f64>) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n_coeffs(lmax)];
    sh_all_into(lmax, dir, &mut out);
    out
}

pub fn sh_all_into(lmax: usize, dir: &Vector3<f64>, out: &mut [Complex64]) {
    let x = dir.z.clamp(-1.0, 1.0);
    let gamma = dir.y.atan2(dir.x);
    let inv = 1.0 / (2.0 * PI).sqrt();
    for am in 0..=lmax {
        let col = legendre_column(am, lmax, x);
        let phase = Complex64::from_polar(1.0, am as f64 * gamma);
        for (j, p) in col.iter().enumerate() {
            let l = am + j;
            let base = p * inv;
            out[sh_index(l, am as i64)] = phase * (base * epsilon(am as i64));
            if am > 0 {
                out[sh_index(l, -(am as i64))] = phase.conj() * base;
            }
        }
    }
}

/// Coefficients of `x·P_l^m` for the unnormalized functions:
/// `x P_l^m = ξ P_{l+1}^m + ν P_{l-1}^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceX {
    pub xi: f64,
    pub nu: f64,
}

/// Coefficients of `x²·P_l^m = ζ P_{l+2}^m + η P_l^m + α P_{l-2}^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceX2 {
    pub zeta: f64,
    pub eta: f64,
    pub alpha: f64,
}

pub fn recurrence_x(l: usize, m: i64) -> Result<RecurrenceX> {
    let am = check_order(l, m)? as f64;
    let l = l as f64;
    Ok(RecurrenceX {
        xi: (l - am + 1.0) / (2.0 * l + 1.0),
        nu: (l + am) / (2.0 * l + 1.0),
    })
}

/// Same identity in the normalized basis, `x P̄_l = ξ̄ P̄_{l+1} + ν̄ P̄_{l-1}`.
/// The `ν̄` term is zero when `l - 1 < |m|`.
pub fn recurrence_x_normalized(l: usize, m: i64) -> Result<RecurrenceX> {
    let am = check_order(l, m)?;
    let nu = if l > am { x_coupling(l, am) } else { 0.0 };
    Ok(RecurrenceX {
        xi: x_coupling(l + 1, am),
        nu,
    })
}

pub fn recurrence_x2(l: usize, m: i64) -> Result<RecurrenceX2> {
    let am = check_order(l, m)? as f64;
    let l = l as f64;
    Ok(RecurrenceX2 {
        zeta: (l - am + 1.0) * (l - am + 2.0) / ((2.0 * l + 3.0) * (2.0 * l + 1.0)),
        eta: (2.0 * l * (l + 1.0) - 2.0 * am * am - 1.0) / (4.0 * l * (l + 1.0) - 3.0),
        alpha: (l + am - 1.0) * (l + am) / ((2.0 * l - 1.0) * (2.0 * l + 1.0)),
    })
}

/// Normalized-basis `x²` identity. The `α` term is zero when `l - 2 < |m|`.
pub fn recurrence_x2_normalized(l: usize, m: i64) -> Result<RecurrenceX2> {
    let am = check_order(l, m)?;
    let raw = recurrence_x2(l, m)?;
    let alpha = if l >= am + 2 {
        x_coupling(l, am) * x_coupling(l - 1, am)
    } else {
        0.0
    };
    Ok(RecurrenceX2 {
        zeta: x_coupling(l + 1, am) * x_coupling(l + 2, am),
        eta: raw.eta,
        alpha,
    })
}

/// Normalized coupling `⟨P̄_l, x P̄_{l-1}⟩ = √((l² - m²)/(4l² - 1))`.
#[inline]
pub(crate) fn x_coupling(l: usize, am: usize) -> f64 {
    let l = l as f64;
    let m = am as f64;
    ((l * l - m * m) / (4.0 * l * l - 1.0)).sqrt()
}

/// Unit vector for polar angle `β` and azimuth `γ`.
pub fn direction(beta: f64, gamma: f64) -> Vector3<f64> {
    Vector3::new(
        beta.sin() * gamma.cos(),
        beta.sin() * gamma.sin(),
        beta.cos(),
    )
}
