//! Full kernels on `R³⋊S²` from per-frequency propagation.
//!
//! For every frequency `ω` on a centered cubic grid the delta at `(0, e_z)` is
//! expanded in harmonics whose pole is `ω/|ω|`, each order `m` is propagated
//! independently, and the result is rotated back to the fixed basis. A
//! centered inverse DFT then gives the spatial kernel.
//!
//! The DFT uses physical scaling `(Δω/2π)³`, so a kernel whose zero-frequency
//! monopole is `1/√(4π)` has unit mass on the spatial grid.

use std::borrow::Cow;
use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::evolution::{propagator_matrix, Horizon, ProcessParams, Route};
use crate::field::{FieldValues, R3S2Field};
use crate::geometry::{rot_x, rot_z, section};
use crate::sh::{n_coeffs, sh_all, sh_all_into, sh_index, OrientationSampling, WignerD};

/// Frequencies `ω_ijk = (i, j, k)·ηπ/N` for `i, j, k ∈ {-N, …, N}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub n_half: usize,
    pub eta: f64,
    pub spacing: f64,
}

pub fn make_grid(n_half: usize, eta: f64) -> Result<FrequencyGrid> {
    if n_half < 1 {
        return Err(Error::Parameter(
            "grid half-width must be at least 1".into(),
        ));
    }
    if !(eta >= 1.0) || !eta.is_finite() {
        return Err(Error::Parameter(format!(
            "grid extent factor {eta} must be at least 1"
        )));
    }
    Ok(FrequencyGrid {
        n_half,
        eta,
        spacing: eta * PI / n_half as f64,
    })
}

impl FrequencyGrid {
    /// Samples per axis.
    pub fn size(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn n_points(&self) -> usize {
        self.size().pow(3)
    }

    pub fn axis(&self) -> Vec<f64> {
        let n = self.n_half as i64;
        (-n..=n).map(|i| i as f64 * self.spacing).collect()
    }

    /// Frequency of grid slot `(i, j, k)`, each in `0 .. size()`.
    pub fn omega(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let n = self.n_half as f64;
        Vector3::new(i as f64 - n, j as f64 - n, k as f64 - n) * self.spacing
    }

    /// Spatial voxel pitch of the inverse transform.
    pub fn voxel_size(&self) -> f64 {
        2.0 * PI / (self.size() as f64 * self.spacing)
    }

    /// Linear slot of `-ω` given the slot of `ω`.
    pub fn mirror(&self, v: usize) -> usize {
        let m = self.size();
        let (i, j, k) = (v % m, (v / m) % m, v / (m * m));
        (m - 1 - i) + m * ((m - 1 - j) + m * (m - 1 - k))
    }

    fn slot_omega(&self, v: usize) -> Vector3<f64> {
        let m = self.size();
        self.omega(v % m, (v / m) % m, v / (m * m))
    }

    fn slot_key(&self, v: usize) -> usize {
        let m = self.size();
        let n = self.n_half as i64;
        let c = [
            (v % m) as i64 - n,
            ((v / m) % m) as i64 - n,
            (v / (m * m)) as i64 - n,
        ];
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) as usize
    }
}

/// Rotation taking `e_z` to `ω/|ω|` with columns
/// `((ω×e_z)×ω)/‖·‖, (ω×e_z)/‖·‖, ω/|ω|`.
///
/// Rays along `+e_z` use the identity, rays along `-e_z` a half turn about `e_x`.
pub fn reorientation(omega: &Vector3<f64>) -> Matrix3<f64> {
    let r = omega.norm();
    if r == 0.0 {
        return Matrix3::identity();
    }
    let u = omega / r;
    let a = u.cross(&Vector3::z());
    let an = a.norm();
    if an < 1e-14 {
        return if u.z > 0.0 {
            Matrix3::identity()
        } else {
            rot_x(PI)
        };
    }
    let c2 = a / an;
    let c1 = c2.cross(&u);
    Matrix3::from_columns(&[c1, c2, u])
}

/// Rotation of one frequency together with its Wigner-D blocks.
#[derive(Debug, Clone)]
pub struct ReorientationTable {
    pub rotation: Matrix3<f64>,
    pub wigner: WignerD,
}

impl ReorientationTable {
    pub fn new(omega: &Vector3<f64>, lmax: usize) -> Result<Self> {
        let rotation = reorientation(omega);
        Ok(Self {
            wigner: WignerD::new(&rotation, lmax)?,
            rotation,
        })
    }
}

/// Complex SH coefficients on the frequency grid, stored like [`R3S2Field`]
/// (`slot + size³·(l² + l + m)`).
#[derive(Debug, Clone)]
pub struct FrequencyField {
    pub grid: FrequencyGrid,
    pub lmax: usize,
    pub values: Vec<Complex64>,
}

impl FrequencyField {
    pub fn coefficients_at(&self, slot: usize) -> Vec<Complex64> {
        let np = self.grid.n_points();
        (0..n_coeffs(self.lmax))
            .map(|k| self.values[k * np + slot])
            .collect()
    }

    pub fn slot(&self, i: usize, j: usize, k: usize) -> usize {
        let m = self.grid.size();
        i + m * (j + m * k)
    }

    /// Largest `|c_{l,m}(-ω) - (-1)^m conj(c_{l,-m}(ω))|` relative to the
    /// largest coefficient magnitude.
    pub fn hermitian_violation(&self) -> f64 {
        let np = self.grid.n_points();
        let scale = self.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for (k, l, m) in lm_iter(self.lmax) {
            let km = sh_index(l, -m);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for v in 0..np {
                let w = self.grid.mirror(v);
                let d = self.values[k * np + w] - self.values[km * np + v].conj() * sign;
                worst = worst.max(d.norm());
            }
        }
        worst / scale
    }

    /// Replace each pair by its Hermitian average; returns the prior violation.
    pub fn symmetrize(&mut self) -> f64 {
        let before = self.hermitian_violation();
        let np = self.grid.n_points();
        for (k, l, m) in lm_iter(self.lmax) {
            let km = sh_index(l, -m);
            if k > km {
                continue;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for v in 0..np {
                let w = self.grid.mirror(v);
                if k == km && w < v {
                    continue;
                }
                // c_k(w) pairs with sign·conj(c_km(v)) and c_km(w) with sign·conj(c_k(v)).
                let a = 0.5 * (self.values[k * np + w] + self.values[km * np + v].conj() * sign);
                let b = 0.5 * (self.values[km * np + w] + self.values[k * np + v].conj() * sign);
                self.values[k * np + w] = a;
                self.values[km * np + v] = a.conj() * sign;
                self.values[km * np + w] = b;
                self.values[k * np + v] = b.conj() * sign;
            }
        }
        before
    }
}

fn lm_iter(lmax: usize) -> impl Iterator<Item = (usize, usize, i64)> {
    (0..=lmax).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (sh_index(l, m), l, m)))
}

/// Propagator blocks for every `|m|`, keyed by `i² + j² + k²`.
struct PropagatorCache {
    blocks: HashMap<usize, Vec<DMatrix<Complex64>>>,
}

impl PropagatorCache {
    fn build(
        grid: &FrequencyGrid,
        p: &ProcessParams,
        lmax: usize,
        horizon: Horizon,
        route: Route,
    ) -> Result<Self> {
        let n = grid.n_half;
        let mut keys = vec![false; 3 * n * n + 1];
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    keys[i * i + j * j + k * k] = true;
                }
            }
        }
        let keys: Vec<usize> = keys
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| k)
            .collect();
        let blocks = keys
            .par_iter()
            .map(|&key| {
                let r = grid.spacing * (key as f64).sqrt();
                let mats = (0..=lmax as i64)
                    .map(|m| propagator_matrix(m, r, p, lmax, horizon, route))
                    .collect::<Result<Vec<_>>>()?;
                Ok((key, mats))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(Self { blocks })
    }
}

/// Apply order-by-order propagators to coefficients in the reoriented basis.
fn propagate(blocks: &[DMatrix<Complex64>], lmax: usize, u: &[Complex64], out: &mut [Complex64]) {
    for m in -(lmax as i64)..=lmax as i64 {
        let am = m.unsigned_abs() as usize;
        let p = &blocks[am];
        let len = lmax + 1 - am;
        for a in 0..len {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..len {
                acc += p[(a, b)] * u[sh_index(am + b, m)];
            }
            out[sh_index(am + a, m)] = acc;
        }
    }
}

/// Per-frequency evolution of the delta at `(0, e_z)` over `horizon`.
pub fn frequency_kernel(
    grid: &FrequencyGrid,
    p: &ProcessParams,
    lmax: usize,
    horizon: Horizon,
    route: Route,
) -> Result<FrequencyField> {
    let cache = PropagatorCache::build(grid, p, lmax, horizon, route)?;
    let np = grid.n_points();
    let nk = n_coeffs(lmax);
    let plane = grid.size() * grid.size();
    let mut values = vec![Complex64::new(0.0, 0.0); np * nk];
    for z in 0..grid.size() {
        let buf = (0..plane)
            .into_par_iter()
            .map(|q| {
                let v = z * plane + q;
                let omega = grid.slot_omega(v);
                let blocks = &cache.blocks[&grid.slot_key(v)];
                let rot = reorientation(&omega);
                let start = rot.transpose() * Vector3::z();
                let u: Vec<Complex64> = sh_all(lmax, &start).iter().map(|y| y.conj()).collect();
                let mut w = vec![Complex64::new(0.0, 0.0); nk];
                propagate(blocks, lmax, &u, &mut w);
                if omega.norm() == 0.0 {
                    return Ok(w);
                }
                let d = WignerD::new(&rot, lmax)?;
                let mut out = vec![Complex64::new(0.0, 0.0); nk];
                d.apply_into(&w, &mut out);
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        for (q, c) in buf.iter().enumerate() {
            for (k, x) in c.iter().enumerate() {
                values[k * np + z * plane + q] = *x;
            }
        }
    }
    Ok(FrequencyField {
        grid: *grid,
        lmax,
        values,
    })
}

/// Fixed-time kernel `K_t` in the frequency domain.
pub fn compute_kernel(
    grid: &FrequencyGrid,
    p: &ProcessParams,
    lmax: usize,
) -> Result<FrequencyField> {
    p.validate_time()?;
    frequency_kernel(grid, p, lmax, Horizon::Time(p.t), Route::Default)
}

/// Γ(k, α) travel-time kernel in the spatial domain; `k = 1` is the resolvent.
pub fn gamma_kernel(grid: &FrequencyGrid, p: &ProcessParams, lmax: usize) -> Result<R3S2Field> {
    p.validate_resolvent()?;
    let f = frequency_kernel(
        grid,
        p,
        lmax,
        Horizon::Gamma {
            alpha: p.alpha,
            k: p.gamma_k,
        },
        Route::Default,
    )?;
    inverse_spatial_fft(f)
}

/// Fixed-time kernel in the spatial domain.
pub fn spatial_kernel(grid: &FrequencyGrid, p: &ProcessParams, lmax: usize) -> Result<R3S2Field> {
    inverse_spatial_fft(compute_kernel(grid, p, lmax)?)
}

/// Apply the process over `horizon` to arbitrary frequency-domain data,
/// which is a shift-twist convolution with the corresponding kernel.
pub fn evolve_frequency_field(
    field: &FrequencyField,
    p: &ProcessParams,
    horizon: Horizon,
) -> Result<FrequencyField> {
    let grid = field.grid;
    let lmax = field.lmax;
    let cache = PropagatorCache::build(&grid, p, lmax, horizon, Route::Default)?;
    let np = grid.n_points();
    let nk = n_coeffs(lmax);
    let cols = (0..np)
        .into_par_iter()
        .map(|v| {
            let omega = grid.slot_omega(v);
            let rot = reorientation(&omega);
            let c = field.coefficients_at(v);
            let mut u = vec![Complex64::new(0.0, 0.0); nk];
            WignerD::new(&rot.transpose(), lmax)?.apply_into(&c, &mut u);
            let mut w = vec![Complex64::new(0.0, 0.0); nk];
            propagate(&cache.blocks[&grid.slot_key(v)], lmax, &u, &mut w);
            WignerD::new(&rot, lmax)?.apply_into(&w, &mut u);
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![Complex64::new(0.0, 0.0); np * nk];
    for (v, c) in cols.iter().enumerate() {
        for (k, x) in c.iter().enumerate() {
            values[k * np + v] = *x;
        }
    }
    Ok(FrequencyField { grid, lmax, values })
}

/// Hermitian violation above which the inverse transform refuses the input.
pub const HERMITIAN_LIMIT: f64 = 1e-6;

/// Centered inverse 3D DFT of every coefficient slab, after Hermitian
/// symmetrization, followed by projection onto real-valued functions.
pub fn inverse_spatial_fft(mut field: FrequencyField) -> Result<R3S2Field> {
    let violation = field.symmetrize();
    if violation > HERMITIAN_LIMIT {
        return Err(Error::Symmetry {
            violation,
            limit: HERMITIAN_LIMIT,
        });
    }
    let grid = field.grid;
    let m = grid.size();
    let np = grid.n_points();
    let scale = (grid.spacing / (2.0 * PI)).powi(3);
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    field.values.par_chunks_mut(np).for_each(|slab| {
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..3 {
            let stride = m.pow(axis as u32);
            for base in 0..np {
                if !(base / stride).is_multiple_of(m) {
                    continue;
                }
                for (a, x) in line.iter_mut().enumerate() {
                    *x = slab[base + a * stride];
                }
                line.rotate_left(grid.n_half);
                fft.process_with_scratch(&mut line, &mut scratch);
                line.rotate_right(grid.n_half);
                for (a, x) in line.iter().enumerate() {
                    slab[base + a * stride] = *x;
                }
            }
        }
        for x in slab.iter_mut() {
            *x *= scale;
        }
    });
    project_real(&mut field.values, field.lmax, np);
    R3S2Field::from_harmonics([m, m, m], grid.voxel_size(), field.lmax, field.values)
}

/// Largest deviation of per-voxel coefficients from those of a real function,
/// relative to the largest coefficient.
pub fn imaginary_residue(values: &[Complex64], lmax: usize, nv: usize) -> f64 {
    let scale = values.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for (k, l, m) in lm_iter(lmax) {
        let km = sh_index(l, -m);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for v in 0..nv {
            worst = worst.max((values[k * nv + v] - values[km * nv + v].conj() * sign).norm());
        }
    }
    worst / scale
}

fn project_real(values: &mut [Complex64], lmax: usize, nv: usize) {
    for (k, l, m) in lm_iter(lmax) {
        let km = sh_index(l, -m);
        if k > km {
            continue;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for v in 0..nv {
            let a = 0.5 * (values[k * nv + v] + values[km * nv + v].conj() * sign);
            values[k * nv + v] = a;
            values[km * nv + v] = a.conj() * sign;
        }
    }
}

/// Options for [`verify_symmetries`].
#[derive(Debug, Clone)]
pub struct SymmetryCheck {
    /// Rotation angles about `e_z`.
    pub angles: Vec<f64>,
    /// Also test `K(y, n) = K(-R_nᵀy, R_nᵀe_z)`.
    pub inversion: bool,
    /// Test voxels lie within this fraction of the half-extent.
    pub box_fraction: f64,
    /// Voxel stride of the test set.
    pub stride: usize,
    pub directions: OrientationSampling,
}

impl Default for SymmetryCheck {
    fn default() -> Self {
        Self {
            angles: vec![PI / 2.0, PI, 0.3, PI / 3.0, 2.0, 4.4],
            inversion: true,
            box_fraction: 0.5,
            stride: 1,
            directions: OrientationSampling::icosahedral(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// Largest `|K(y,n) - K(R y, R n)|` over angles and test points, relative to max |K|.
    pub rotation: f64,
    /// Same for the inversion symmetry, when requested.
    pub inversion: Option<f64>,
    pub max_value: f64,
    pub points: usize,
}

/// Measure the rotation and inversion symmetries of a spatial kernel.
/// Off-grid values are interpolated tricubically.
pub fn verify_symmetries(field: &R3S2Field, check: &SymmetryCheck) -> Result<SymmetryReport> {
    let coeffs = match &field.data {
        FieldValues::Harmonics { .. } => Cow::Borrowed(field),
        FieldValues::Samples { sampling, .. } => {
            let mut lmax = 0;
            while n_coeffs(lmax + 1) * 2 <= sampling.len() {
                lmax += 1;
            }
            Cow::Owned(field.to_harmonics(lmax)?)
        }
    };
    let FieldValues::Harmonics { lmax, values } = &coeffs.data else {
        unreachable!()
    };
    let lmax = *lmax;
    let nv = coeffs.n_voxels();
    let nk = n_coeffs(lmax);
    let dirs = &check.directions.directions;
    let ctr = coeffs.center();
    let stride = check.stride.max(1);
    let test: Vec<usize> = (0..nv)
        .filter(|&v| {
            let c = coeffs.voxel_coords(v);
            (0..3).all(|a| {
                let off = c[a] as f64 - ctr[a];
                off.abs() <= check.box_fraction * ctr[a] && (c[a] % stride == 0)
            })
        })
        .collect();

    let ys: Vec<Vec<Complex64>> = dirs.iter().map(|d| sh_all(lmax, d)).collect();
    let eval = |c: &[Complex64], y: &[Complex64]| -> f64 {
        c.iter().zip(y).map(|(c, y)| (c * y).re).sum()
    };

    let base: Vec<Vec<f64>> = test
        .par_iter()
        .map(|&v| {
            let c: Vec<Complex64> = (0..nk).map(|k| values[k * nv + v]).collect();
            ys.iter().map(|y| eval(&c, y)).collect()
        })
        .collect();
    let max_value = base.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    if max_value == 0.0 {
        return Ok(SymmetryReport {
            rotation: 0.0,
            inversion: check.inversion.then_some(0.0),
            max_value,
            points: test.len(),
        });
    }

    let mut rotation = 0.0f64;
    for &angle in &check.angles {
        let rz = rot_z(angle);
        let yr: Vec<Vec<Complex64>> = dirs.iter().map(|d| sh_all(lmax, &(rz * d))).collect();
        let worst = test
            .par_iter()
            .zip(&base)
            .map(|(&v, b)| {
                let p = rz * coeffs.position(v);
                let Some(c) = coeffs.interpolate_coefficients_cubic(&p) else {
                    return 0.0;
                };
                yr.iter()
                    .zip(b)
                    .map(|(y, b)| (eval(&c, y) - b).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        rotation = rotation.max(worst);
    }

    let inversion = if check.inversion {
        let frames: Vec<(Matrix3<f64>, Vec<Complex64>)> = dirs
            .iter()
            .map(|d| {
                let r = section(d);
                let mut y = vec![Complex64::new(0.0, 0.0); nk];
                sh_all_into(lmax, &(r.transpose() * Vector3::z()), &mut y);
                (r, y)
            })
            .collect();
        let worst = test
            .par_iter()
            .zip(&base)
            .map(|(&v, b)| {
                let y = coeffs.position(v);
                frames
                    .iter()
                    .zip(b)
                    .map(|((r, yn), b)| {
                        let p = -(r.transpose() * y);
                        match coeffs.interpolate_coefficients_cubic(&p) {
                            Some(c) => (eval(&c, yn) - b).abs(),
                            None => 0.0,
                        }
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        Some(worst / max_value)
    } else {
        None
    };

    Ok(SymmetryReport {
        rotation: rotation / max_value,
        inversion,
        max_value,
        points: test.len(),
    })
}
