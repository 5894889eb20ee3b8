//! Shift-twist convolution on `R³⋊S²`:
//!
//! `(K ∗ U)(y, n) = Σ_{y', n'} K(R_{n'}ᵀ(y - y'), R_{n'}ᵀ n) U(y', n') h³ w_{n'}`
//!
//! with `R_{n'}` the fixed section of [`crate::geometry::section`]. For each
//! input orientation the rotated kernel is sampled on the grid of position
//! differences and convolved with the input slab by FFT.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FieldValues, R3S2Field};
use crate::geometry::section;
use crate::sh::{n_coeffs, sh_all, OrientationSampling, TransformPlan};

/// Rotated directions closer than this to a kernel sample use its value directly.
const HIT_TOLERANCE: f64 = 1e-9;

/// A kernel prepared for inputs of one shape and orientation sampling.
pub struct ConvolutionPlan {
    kernel: R3S2Field,
    dims: [usize; 3],
    sampling: OrientationSampling,
    pad: [usize; 3],
    /// Least-squares fit of a sampled kernel, used off the sample directions.
    fit: Option<TransformPlan>,
    ffts: [Arc<dyn Fft<f64>>; 3],
    iffts: [Arc<dyn Fft<f64>>; 3],
}

impl ConvolutionPlan {
    pub fn new(
        kernel: &R3S2Field,
        dims: [usize; 3],
        sampling: &OrientationSampling,
    ) -> Result<Self> {
        if let Some(ks) = kernel.sampling() {
            if !ks.matches(sampling, 1e-12) {
                return Err(Error::SamplingMismatch(format!(
                    "kernel has {} orientations, input {}, or the directions differ",
                    ks.len(),
                    sampling.len()
                )));
            }
        }
        if dims.contains(&0) {
            return Err(Error::Shape(format!("empty input grid {dims:?}")));
        }
        let pad = dims.map(|d| 2 * d - 1);
        let mut planner = FftPlanner::new();
        let ffts = pad.map(|p| planner.plan_fft_forward(p));
        let iffts = pad.map(|p| planner.plan_fft_inverse(p));
        let fit = match &kernel.data {
            FieldValues::Samples { sampling: ks, .. } => {
                let mut lmax = 0;
                while n_coeffs(lmax + 1) * 2 <= ks.len() {
                    lmax += 1;
                }
                Some(TransformPlan::new(ks, lmax)?)
            }
            FieldValues::Harmonics { .. } => None,
        };
        Ok(Self {
            kernel: kernel.clone(),
            dims,
            sampling: sampling.clone(),
            pad,
            fit,
            ffts,
            iffts,
        })
    }

    /// Linear map from the kernel's per-voxel data (coefficients or samples)
    /// to its values at `dirs`.
    fn direction_map(&self, dirs: &[Vector3<f64>]) -> DMatrix<Complex64> {
        match &self.kernel.data {
            FieldValues::Harmonics { lmax, .. } => {
                let nk = n_coeffs(*lmax);
                let mut m = DMatrix::zeros(dirs.len(), nk);
                for (j, d) in dirs.iter().enumerate() {
                    for (k, y) in sh_all(*lmax, d).into_iter().enumerate() {
                        m[(j, k)] = y;
                    }
                }
                m
            }
            FieldValues::Samples { sampling, .. } => {
                let fit = self.fit.as_ref().expect("sampled kernels carry a fit");
                let mut m = DMatrix::zeros(dirs.len(), sampling.len());
                for (j, d) in dirs.iter().enumerate() {
                    if let Some(i) = sampling.find(d, HIT_TOLERANCE) {
                        m[(j, i)] = Complex64::new(1.0, 0.0);
                    } else {
                        let y = sh_all(fit.lmax, d);
                        let row = DMatrix::from_row_slice(1, y.len(), &y) * fit.projector();
                        m.set_row(j, &row.row(0));
                    }
                }
                m
            }
        }
    }

    fn fft3(&self, data: &mut [Complex64], inverse: bool) {
        let [px, py, pz] = self.pad;
        let plans = if inverse { &self.iffts } else { &self.ffts };
        let strides = [1, px, px * py];
        let lens = [px, py, pz];
        let total = px * py * pz;
        for a in 0..3 {
            let (n, s) = (lens[a], strides[a]);
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plans[a].get_inplace_scratch_len()];
            for base in 0..total {
                if (base / s) % n != 0 {
                    continue;
                }
                for (i, x) in line.iter_mut().enumerate() {
                    *x = data[base + i * s];
                }
                plans[a].process_with_scratch(&mut line, &mut scratch);
                for (i, x) in line.iter().enumerate() {
                    data[base + i * s] = *x;
                }
            }
        }
    }

    pub fn apply(&self, input: &R3S2Field) -> Result<R3S2Field> {
        let FieldValues::Samples { sampling, values } = &input.data else {
            return Err(Error::Shape("input must hold orientation samples".into()));
        };
        if !sampling.matches(&self.sampling, 1e-12) || input.dims != self.dims {
            return Err(Error::SamplingMismatch(
                "input does not match the plan".into(),
            ));
        }
        if (input.voxel_size - self.kernel.voxel_size).abs() > 1e-12 * input.voxel_size {
            return Err(Error::Shape(format!(
                "kernel voxel size {} differs from input voxel size {}",
                self.kernel.voxel_size, input.voxel_size
            )));
        }
        let [nx, ny, nz] = self.dims;
        let [px, py, pz] = self.pad;
        let np = px * py * pz;
        let nv = nx * ny * nz;
        let no = sampling.len();
        let h = input.voxel_size;
        let h3 = h.powi(3);

        let input_hat: Vec<Option<Vec<Complex64>>> = (0..no)
            .into_par_iter()
            .map(|o| {
                let slab = &values[o * nv..(o + 1) * nv];
                if slab.iter().all(|v| *v == 0.0) {
                    return None;
                }
                let mut buf = vec![Complex64::new(0.0, 0.0); np];
                for v in 0..nv {
                    let (x, y, z) = (v % nx, (v / nx) % ny, v / (nx * ny));
                    buf[x + px * (y + py * z)] = Complex64::new(slab[v], 0.0);
                }
                self.fft3(&mut buf, false);
                Some(buf)
            })
            .collect();

        // differences d = i - j in [-(n-1), n-1], stored at d mod p
        let diffs: Vec<(usize, Vector3<f64>)> = (0..np)
            .map(|s| {
                let c = [s % px, (s / px) % py, s / (px * py)];
                let off = |c: usize, n: usize, p: usize| {
                    if c < n {
                        c as f64
                    } else {
                        c as f64 - p as f64
                    }
                };
                (
                    s,
                    Vector3::new(off(c[0], nx, px), off(c[1], ny, py), off(c[2], nz, pz)) * h,
                )
            })
            .collect();

        let mut acc = vec![vec![Complex64::new(0.0, 0.0); np]; no];
        for (src, uh) in input_hat.iter().enumerate() {
            let Some(uh) = uh else { continue };
            let r = section(&sampling.directions[src]);
            let rt = r.transpose();
            let dirs: Vec<Vector3<f64>> = sampling.directions.iter().map(|n| rt * n).collect();
            let map = self.direction_map(&dirs);
            // kernel values at every difference for every output orientation
            let vals: Vec<Option<Vec<f64>>> = diffs
                .par_iter()
                .map(|(_, z)| {
                    let c = self.kernel.interpolate_coefficients_cubic(&(rt * z))?;
                    Some(
                        (0..no)
                            .map(|j| {
                                (0..c.len())
                                    .map(|k| map[(j, k)] * c[k])
                                    .sum::<Complex64>()
                                    .re
                            })
                            .collect(),
                    )
                })
                .collect();
            let weight = sampling.weights[src] * h3;
            acc.par_iter_mut().enumerate().for_each(|(j, a)| {
                let mut buf = vec![Complex64::new(0.0, 0.0); np];
                let mut any = false;
                for (s, v) in vals.iter().enumerate() {
                    if let Some(v) = v {
                        buf[s] = Complex64::new(v[j], 0.0);
                        any |= v[j] != 0.0;
                    }
                }
                if !any {
                    return;
                }
                self.fft3(&mut buf, false);
                for ((a, k), u) in a.iter_mut().zip(&buf).zip(uh) {
                    *a += k * u * weight;
                }
            });
        }

        let slabs: Vec<Vec<f64>> = acc
            .into_par_iter()
            .map(|mut a| {
                self.fft3(&mut a, true);
                let scale = 1.0 / np as f64;
                (0..nv)
                    .map(|v| {
                        let (x, y, z) = (v % nx, (v / nx) % ny, v / (nx * ny));
                        a[x + px * (y + py * z)].re * scale
                    })
                    .collect()
            })
            .collect();
        let out = slabs.concat();
        R3S2Field::from_samples(self.dims, h, sampling.clone(), out)
    }
}

/// Convolve `input` (orientation samples) with `kernel`.
pub fn shift_twist_convolve(kernel: &R3S2Field, input: &R3S2Field) -> Result<R3S2Field> {
    let sampling = input
        .sampling()
        .ok_or_else(|| Error::Shape("input must hold orientation samples".into()))?;
    ConvolutionPlan::new(kernel, input.dims, sampling)?.apply(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::ProcessParams;
    use crate::synthesis::{make_grid, spatial_kernel};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn octahedral() -> OrientationSampling {
        let d = vec![
            Vector3::z(),
            Vector3::x(),
            Vector3::y(),
            -Vector3::x(),
            -Vector3::y(),
            -Vector3::z(),
        ];
        OrientationSampling::new(d, vec![4.0 * PI / 6.0; 6]).unwrap()
    }

    fn random_field(dims: [usize; 3], h: f64, s: &OrientationSampling, seed: u64) -> R3S2Field {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = dims.iter().product::<usize>() * s.len();
        R3S2Field::from_samples(
            dims,
            h,
            s.clone(),
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
        )
        .unwrap()
    }

    fn spectral_kernel() -> R3S2Field {
        let g = make_grid(3, 2.0).unwrap();
        spatial_kernel(&g, &ProcessParams::diffusion(1.0, 0.2, 0.5), 4).unwrap()
    }

    fn samples(f: &R3S2Field) -> &[f64] {
        match &f.data {
            FieldValues::Samples { values, .. } => values,
            _ => unreachable!(),
        }
    }

    #[test]
    fn impulse_response_is_kernel() {
        let k = spectral_kernel();
        let s = OrientationSampling::icosahedral(1);
        let dims = [7, 7, 7];
        let mut u = R3S2Field::zeros_samples(dims, k.voxel_size, s.clone());
        let c = u.center_voxel();
        let nv = u.n_voxels();
        if let FieldValues::Samples { values, .. } = &mut u.data {
            values[c] = 1.0 / (k.voxel_size.powi(3) * s.weights[0]);
        }
        let out = shift_twist_convolve(&k, &u).unwrap();
        let want = k.to_samples(&s).unwrap();
        let (a, b) = (samples(&out), samples(&want));
        let diff: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(diff < 1e-6 * norm, "{diff} / {norm}");
        assert_eq!(a.len(), nv * s.len());
    }

    #[test]
    fn delta_kernel_is_identity_on_closed_sampling() {
        let s = octahedral();
        let h = 0.5;
        let mut k = R3S2Field::zeros_samples([3, 3, 3], h, s.clone());
        let c = k.center_voxel();
        if let FieldValues::Samples { values, .. } = &mut k.data {
            values[c] = 1.0 / (h.powi(3) * s.weights[0]);
        }
        let u = random_field([5, 4, 6], h, &s, 1);
        let out = shift_twist_convolve(&k, &u).unwrap();
        for (a, b) in samples(&out).iter().zip(samples(&u)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linearity() {
        let k = spectral_kernel();
        let s = OrientationSampling::icosahedral(0);
        let u1 = random_field([5, 5, 5], k.voxel_size, &s, 2);
        let u2 = random_field([5, 5, 5], k.voxel_size, &s, 3);
        let plan = ConvolutionPlan::new(&k, [5, 5, 5], &s).unwrap();
        let comb: Vec<f64> = samples(&u1)
            .iter()
            .zip(samples(&u2))
            .map(|(a, b)| 2.0 * a - 0.5 * b)
            .collect();
        let u3 = R3S2Field::from_samples([5, 5, 5], k.voxel_size, s.clone(), comb).unwrap();
        let (o1, o2, o3) = (
            plan.apply(&u1).unwrap(),
            plan.apply(&u2).unwrap(),
            plan.apply(&u3).unwrap(),
        );
        for ((a, b), c) in samples(&o1).iter().zip(samples(&o2)).zip(samples(&o3)) {
            assert!((2.0 * a - 0.5 * b - c).abs() < 1e-10);
        }
    }

    #[test]
    fn equivariant_under_quarter_turns() {
        let k = spectral_kernel();
        let s = octahedral();
        let dims = [5, 5, 5];
        let u = random_field(dims, k.voxel_size, &s, 4);
        // rotate input by 90° about e_z: (x, y) -> (-y, x) on positions and directions
        let nv = 125;
        let perm = [0usize, 2, 3, 4, 1, 5];
        let rot = |f: &R3S2Field| {
            let v = samples(f);
            let mut out = vec![0.0; v.len()];
            for o in 0..6 {
                for vox in 0..nv {
                    let (x, y, z) = (vox % 5, (vox / 5) % 5, vox / 25);
                    let (x2, y2) = (4 - y, x);
                    out[perm[o] * nv + x2 + 5 * (y2 + 5 * z)] = v[o * nv + vox];
                }
            }
            R3S2Field::from_samples(dims, f.voxel_size, s.clone(), out).unwrap()
        };
        let a = rot(&shift_twist_convolve(&k, &u).unwrap());
        let b = shift_twist_convolve(&k, &rot(&u)).unwrap();
        let scale = samples(&a).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in samples(&a).iter().zip(samples(&b)) {
            assert!((x - y).abs() < 1e-9 * scale, "{x} {y}");
        }
    }

    #[test]
    fn mass_multiplies_on_closed_sampling() {
        let s = octahedral();
        let h = 0.5;
        let k = random_field([3, 3, 3], h, &s, 5);
        let mut u = random_field([7, 7, 7], h, &s, 6);
        // keep the input one voxel away from the faces so nothing leaves the grid
        let inner: Vec<bool> = (0..u.n_voxels())
            .map(|v| u.voxel_coords(v).iter().all(|&c| (1..6).contains(&c)))
            .collect();
        if let FieldValues::Samples { values, .. } = &mut u.data {
            for (i, x) in values.iter_mut().enumerate() {
                if !inner[i % 343] {
                    *x = 0.0;
                }
            }
        }
        let out = shift_twist_convolve(&k, &u).unwrap();
        let want = k.mass() * u.mass();
        assert!((out.mass() - want).abs() < 1e-6 * want);
    }

    #[test]
    fn mismatched_sampling_rejected() {
        let s = octahedral();
        let k = random_field([3, 3, 3], 0.5, &s, 7);
        let u = random_field([3, 3, 3], 0.5, &OrientationSampling::icosahedral(0), 8);
        assert!(matches!(
            shift_twist_convolve(&k, &u),
            Err(Error::SamplingMismatch(_))
        ));
    }
}
