//! Scalar fields on a cubic spatial grid times the sphere.
//!
//! Values are stored slab by slab: index `x + nx·(y + ny·(z + nz·o))`, where
//! `o` runs over orientation samples or over flat SH indices `l² + l + m`.
//! Voxel `(i, j, k)` sits at `((i - cx)h, (j - cy)h, (k - cz)h)` with
//! `c = (n - 1)/2`, so odd grids are centered on a voxel.

mod io;

pub use io::{load_field, read_field, save_field, write_field, FORMAT_VERSION, MAGIC};

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sh::{n_coeffs, sh_all, sh_all_into, OrientationSampling, TransformPlan};

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    /// Real values per orientation sample.
    Samples {
        sampling: OrientationSampling,
        values: Vec<f64>,
    },
    /// Complex SH coefficients per voxel.
    Harmonics { lmax: usize, values: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct R3S2Field {
    pub dims: [usize; 3],
    pub voxel_size: f64,
    pub data: FieldValues,
}

impl R3S2Field {
    pub fn from_samples(
        dims: [usize; 3],
        voxel_size: f64,
        sampling: OrientationSampling,
        values: Vec<f64>,
    ) -> Result<Self> {
        let f = Self {
            dims,
            voxel_size,
            data: FieldValues::Samples { sampling, values },
        };
        f.check()?;
        Ok(f)
    }

    pub fn from_harmonics(
        dims: [usize; 3],
        voxel_size: f64,
        lmax: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let f = Self {
            dims,
            voxel_size,
            data: FieldValues::Harmonics { lmax, values },
        };
        f.check()?;
        Ok(f)
    }

    pub fn zeros_samples(dims: [usize; 3], voxel_size: f64, sampling: OrientationSampling) -> Self {
        let n = dims.iter().product::<usize>() * sampling.len();
        Self {
            dims,
            voxel_size,
            data: FieldValues::Samples {
                sampling,
                values: vec![0.0; n],
            },
        }
    }

    fn check(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Shape(format!("empty grid {:?}", self.dims)));
        }
        if !(self.voxel_size > 0.0) || !self.voxel_size.is_finite() {
            return Err(Error::Shape(format!(
                "voxel size {} must be positive",
                self.voxel_size
            )));
        }
        let want = self.n_voxels() * self.n_orient();
        let got = match &self.data {
            FieldValues::Samples { values, .. } => values.len(),
            FieldValues::Harmonics { values, .. } => values.len(),
        };
        if want != got {
            return Err(Error::Shape(format!(
                "{:?} grid with {} orientations needs {want} values, got {got}",
                self.dims,
                self.n_orient()
            )));
        }
        Ok(())
    }

    pub fn n_voxels(&self) -> usize {
        self.dims.iter().product()
    }

    /// Orientation samples, or SH coefficients per voxel.
    pub fn n_orient(&self) -> usize {
        match &self.data {
            FieldValues::Samples { sampling, .. } => sampling.len(),
            FieldValues::Harmonics { lmax, .. } => n_coeffs(*lmax),
        }
    }

    pub fn sampling(&self) -> Option<&OrientationSampling> {
        match &self.data {
            FieldValues::Samples { sampling, .. } => Some(sampling),
            FieldValues::Harmonics { .. } => None,
        }
    }

    #[inline]
    pub fn voxel_index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn voxel_coords(&self, v: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [v % nx, (v / nx) % ny, v / (nx * ny)]
    }

    pub fn center(&self) -> [f64; 3] {
        self.dims.map(|d| (d as f64 - 1.0) / 2.0)
    }

    pub fn position(&self, v: usize) -> Vector3<f64> {
        let c = self.voxel_coords(v);
        let ctr = self.center();
        Vector3::new(
            (c[0] as f64 - ctr[0]) * self.voxel_size,
            (c[1] as f64 - ctr[1]) * self.voxel_size,
            (c[2] as f64 - ctr[2]) * self.voxel_size,
        )
    }

    /// Voxel nearest to the origin.
    pub fn center_voxel(&self) -> usize {
        let c = self.center().map(|c| c.round() as usize);
        self.voxel_index(c[0], c[1], c[2])
    }

    /// Coefficients (or samples) of one voxel.
    pub fn coefficients_at(&self, v: usize) -> Vec<Complex64> {
        let nv = self.n_voxels();
        match &self.data {
            FieldValues::Harmonics { values, lmax } => {
                (0..n_coeffs(*lmax)).map(|k| values[k * nv + v]).collect()
            }
            FieldValues::Samples { values, sampling } => (0..sampling.len())
                .map(|k| Complex64::new(values[k * nv + v], 0.0))
                .collect(),
        }
    }

    /// Value at voxel `v` in direction `n`. Sampled fields use the nearest
    /// sample direction.
    pub fn value_at_voxel(&self, v: usize, n: &Vector3<f64>) -> f64 {
        let nv = self.n_voxels();
        match &self.data {
            FieldValues::Harmonics { values, lmax } => {
                let y = sh_all(*lmax, n);
                y.iter()
                    .enumerate()
                    .map(|(k, y)| (values[k * nv + v] * y).re)
                    .sum()
            }
            FieldValues::Samples { values, sampling } => values[sampling.nearest(n) * nv + v],
        }
    }

    /// Trilinear weights of the 8 voxels around `p`, or `None` outside the grid.
    pub fn trilinear(&self, p: &Vector3<f64>) -> Option<[(usize, f64); 8]> {
        let ctr = self.center();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let u = p[a] / self.voxel_size + ctr[a];
            let top = (self.dims[a] - 1) as f64;
            if !(u >= -1e-9 && u <= top + 1e-9) {
                return None;
            }
            let u = u.clamp(0.0, top);
            let i = (u.floor() as usize).min(self.dims[a].saturating_sub(2));
            base[a] = i;
            frac[a] = if self.dims[a] == 1 { 0.0 } else { u - i as f64 };
        }
        let mut out = [(0usize, 0.0f64); 8];
        for (c, slot) in out.iter_mut().enumerate() {
            let off = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..3 {
                let step = off[a].min(self.dims[a] - 1);
                idx[a] = base[a] + step;
                w *= if off[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            *slot = (self.voxel_index(idx[0], idx[1], idx[2]), w);
        }
        Some(out)
    }

    /// Orientation data interpolated trilinearly at a position.
    pub fn interpolate_coefficients(&self, p: &Vector3<f64>) -> Option<Vec<Complex64>> {
        let w = self.trilinear(p)?;
        let nv = self.n_voxels();
        let no = self.n_orient();
        let mut out = vec![Complex64::new(0.0, 0.0); no];
        match &self.data {
            FieldValues::Harmonics { values, .. } => {
                for (k, o) in out.iter_mut().enumerate() {
                    for (v, wt) in &w {
                        *o += values[k * nv + v] * *wt;
                    }
                }
            }
            FieldValues::Samples { values, .. } => {
                for (k, o) in out.iter_mut().enumerate() {
                    for (v, wt) in &w {
                        o.re += values[k * nv + v] * wt;
                    }
                }
            }
        }
        Some(out)
    }

    /// Orientation data at a position by Catmull-Rom tricubic interpolation
    /// (edge voxels replicated).
    pub fn interpolate_coefficients_cubic(&self, p: &Vector3<f64>) -> Option<Vec<Complex64>> {
        let ctr = self.center();
        let mut idx = [[0usize; 4]; 3];
        let mut wts = [[0.0f64; 4]; 3];
        for a in 0..3 {
            let u = p[a] / self.voxel_size + ctr[a];
            let top = (self.dims[a] - 1) as f64;
            if !(u >= -1e-9 && u <= top + 1e-9) {
                return None;
            }
            let u = u.clamp(0.0, top);
            let i = u.floor().min((top - 1.0).max(0.0));
            let f = u - i;
            let i = i as i64;
            for s in 0..4 {
                idx[a][s] = (i + s as i64 - 1).clamp(0, self.dims[a] as i64 - 1) as usize;
            }
            let (f2, f3) = (f * f, f * f * f);
            wts[a] = [
                0.5 * (-f3 + 2.0 * f2 - f),
                0.5 * (3.0 * f3 - 5.0 * f2 + 2.0),
                0.5 * (-3.0 * f3 + 4.0 * f2 + f),
                0.5 * (f3 - f2),
            ];
        }
        let nv = self.n_voxels();
        let no = self.n_orient();
        let mut stencil = Vec::with_capacity(64);
        for (sz, wz) in idx[2].iter().zip(&wts[2]) {
            for (sy, wy) in idx[1].iter().zip(&wts[1]) {
                for (sx, wx) in idx[0].iter().zip(&wts[0]) {
                    let w = wx * wy * wz;
                    if w != 0.0 {
                        stencil.push((self.voxel_index(*sx, *sy, *sz), w));
                    }
                }
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); no];
        match &self.data {
            FieldValues::Harmonics { values, .. } => {
                for (k, o) in out.iter_mut().enumerate() {
                    let slab = &values[k * nv..(k + 1) * nv];
                    for (v, w) in &stencil {
                        *o += slab[*v] * *w;
                    }
                }
            }
            FieldValues::Samples { values, .. } => {
                for (k, o) in out.iter_mut().enumerate() {
                    let slab = &values[k * nv..(k + 1) * nv];
                    for (v, w) in &stencil {
                        o.re += slab[*v] * w;
                    }
                }
            }
        }
        Some(out)
    }

    /// Sum over voxels and orientations with voxel volume and solid-angle weights.
    pub fn mass(&self) -> f64 {
        let nv = self.n_voxels();
        let h3 = self.voxel_size.powi(3);
        match &self.data {
            FieldValues::Harmonics { values, .. } => {
                values[..nv].iter().map(|c| c.re).sum::<f64>() * (4.0 * PI).sqrt() * h3
            }
            FieldValues::Samples { values, sampling } => {
                sampling
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * values[k * nv..(k + 1) * nv].iter().sum::<f64>())
                    .sum::<f64>()
                    * h3
            }
        }
    }

    /// Values on `sampling` for every voxel (orientation-major layout).
    pub fn to_samples(&self, sampling: &OrientationSampling) -> Result<R3S2Field> {
        let nv = self.n_voxels();
        match &self.data {
            FieldValues::Samples { sampling: s, .. } if s.matches(sampling, 1e-12) => {
                Ok(self.clone())
            }
            FieldValues::Samples { .. } => Err(Error::SamplingMismatch(
                "resampling between different orientation tables is not supported".into(),
            )),
            FieldValues::Harmonics { lmax, values } => {
                let nk = n_coeffs(*lmax);
                let ys: Vec<Vec<Complex64>> = sampling
                    .directions
                    .iter()
                    .map(|d| sh_all(*lmax, d))
                    .collect();
                let mut out = vec![0.0; nv * sampling.len()];
                for (o, y) in ys.iter().enumerate() {
                    let slab = &mut out[o * nv..(o + 1) * nv];
                    for (k, yk) in y.iter().enumerate().take(nk) {
                        let src = &values[k * nv..(k + 1) * nv];
                        for (dst, c) in slab.iter_mut().zip(src) {
                            *dst += c.re * yk.re - c.im * yk.im;
                        }
                    }
                }
                R3S2Field::from_samples(self.dims, self.voxel_size, sampling.clone(), out)
            }
        }
    }

    /// SH coefficients per voxel; sampled data are fitted by weighted least squares.
    pub fn to_harmonics(&self, lmax: usize) -> Result<R3S2Field> {
        let nv = self.n_voxels();
        match &self.data {
            FieldValues::Harmonics { lmax: l, .. } if *l == lmax => Ok(self.clone()),
            FieldValues::Harmonics { lmax: l, values } => {
                let mut out = vec![Complex64::new(0.0, 0.0); n_coeffs(lmax) * nv];
                let keep = n_coeffs((*l).min(lmax)) * nv;
                out[..keep].copy_from_slice(&values[..keep]);
                R3S2Field::from_harmonics(self.dims, self.voxel_size, lmax, out)
            }
            FieldValues::Samples { sampling, values } => {
                let plan = TransformPlan::new(sampling, lmax)?;
                let nk = n_coeffs(lmax);
                let mut out = vec![Complex64::new(0.0, 0.0); nk * nv];
                let mut buf = vec![0.0; sampling.len()];
                for v in 0..nv {
                    for (o, b) in buf.iter_mut().enumerate() {
                        *b = values[o * nv + v];
                    }
                    let c = plan.forward(&buf)?;
                    for (k, x) in c.values.iter().enumerate() {
                        out[k * nv + v] = *x;
                    }
                }
                R3S2Field::from_harmonics(self.dims, self.voxel_size, lmax, out)
            }
        }
    }

    /// Largest and smallest real value over voxels × `sampling`.
    pub fn extrema_on(&self, sampling: &OrientationSampling) -> Result<(f64, f64)> {
        let s = self.to_samples(sampling)?;
        let FieldValues::Samples { values, .. } = &s.data else {
            unreachable!()
        };
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((min, max))
    }

    /// Spatial density `∫_{S²} U(y, n) dσ(n)` per voxel.
    pub fn spatial_marginal(&self) -> Vec<f64> {
        let nv = self.n_voxels();
        match &self.data {
            FieldValues::Harmonics { values, .. } => values[..nv]
                .iter()
                .map(|c| c.re * (4.0 * PI).sqrt())
                .collect(),
            FieldValues::Samples { values, sampling } => (0..nv)
                .map(|v| {
                    sampling
                        .weights
                        .iter()
                        .enumerate()
                        .map(|(k, w)| w * values[k * nv + v])
                        .sum()
                })
                .collect(),
        }
    }
}

/// Summary of a spatial field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub min: f64,
    pub max: f64,
    /// Voxel and orientation index of the maximum.
    pub argmax: (usize, usize),
    pub mass: f64,
    /// Mass-weighted mean position.
    pub first_moment: [f64; 3],
}

impl R3S2Field {
    /// Extrema over voxels × `sampling` (the field's own samples if it has
    /// them), mass and mean position, without materializing a resampled copy.
    pub fn stats(&self, sampling: &OrientationSampling) -> FieldStats {
        let nv = self.n_voxels();
        let per_voxel: Vec<(f64, f64, usize)> = match &self.data {
            FieldValues::Harmonics { lmax, values } => {
                let nk = n_coeffs(*lmax);
                let ys: Vec<Vec<Complex64>> = sampling
                    .directions
                    .iter()
                    .map(|d| sh_all(*lmax, d))
                    .collect();
                (0..nv)
                    .into_par_iter()
                    .map(|v| {
                        let c: Vec<Complex64> = (0..nk).map(|k| values[k * nv + v]).collect();
                        extrema(
                            ys.iter()
                                .map(|y| c.iter().zip(y).map(|(c, y)| (c * y).re).sum()),
                        )
                    })
                    .collect()
            }
            FieldValues::Samples {
                values,
                sampling: own,
            } => (0..nv)
                .into_par_iter()
                .map(|v| extrema((0..own.len()).map(|o| values[o * nv + v])))
                .collect(),
        };
        let mut s = FieldStats {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            argmax: (0, 0),
            mass: 0.0,
            first_moment: [0.0; 3],
        };
        for (v, (lo, hi, o)) in per_voxel.into_iter().enumerate() {
            s.min = s.min.min(lo);
            if hi > s.max {
                s.max = hi;
                s.argmax = (v, o);
            }
        }
        let marginal = self.spatial_marginal();
        let h3 = self.voxel_size.powi(3);
        for (v, m) in marginal.iter().enumerate() {
            let p = self.position(v);
            s.mass += m * h3;
            for a in 0..3 {
                s.first_moment[a] += p[a] * m * h3;
            }
        }
        if s.mass != 0.0 {
            s.first_moment.iter_mut().for_each(|x| *x /= s.mass);
        }
        s
    }
}

fn extrema(vals: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let mut out = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for (i, x) in vals.enumerate() {
        out.0 = out.0.min(x);
        if x > out.1 {
            out.1 = x;
            out.2 = i;
        }
    }
    out
}

/// Evaluate an SH coefficient vector at many directions, reusing a buffer.
pub fn synthesize(coeffs: &[Complex64], lmax: usize, dirs: &[Vector3<f64>]) -> Vec<f64> {
    let mut y = vec![Complex64::new(0.0, 0.0); n_coeffs(lmax)];
    dirs.iter()
        .map(|d| {
            sh_all_into(lmax, d, &mut y);
            coeffs.iter().zip(&y).map(|(c, y)| (c * y).re).sum()
        })
        .collect()
}
