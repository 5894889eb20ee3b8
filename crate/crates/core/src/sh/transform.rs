use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use super::{n_coeffs, sh_all, OrientationSampling, SphCoeffField};
use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e10;

/// Weighted least-squares projector from samples to coefficients, reusable
/// across many sample vectors on the same sampling.
#[derive(Debug, Clone)]
pub struct TransformPlan {
    pub lmax: usize,
    /// `(lmax+1)² × n_samples`
    projector: DMatrix<Complex64>,
}

impl TransformPlan {
    pub fn new(sampling: &OrientationSampling, lmax: usize) -> Result<Self> {
        let nk = n_coeffs(lmax);
        let ns = sampling.len();
        if ns < nk {
            return Err(Error::Conditioning(format!(
                "{ns} samples cannot resolve {nk} coefficients (degree {lmax})"
            )));
        }
        let mut a = DMatrix::<Complex64>::zeros(ns, nk);
        for (i, d) in sampling.directions.iter().enumerate() {
            for (k, y) in sh_all(lmax, d).into_iter().enumerate() {
                a[(i, k)] = y;
            }
        }
        let mut aw = a.adjoint();
        for (i, w) in sampling.weights.iter().enumerate() {
            aw.column_mut(i).scale_mut(*w);
        }
        let gram = &aw * &a;
        let eig = gram.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if min <= 0.0 || max / min > MAX_CONDITION {
            return Err(Error::Conditioning(format!(
                "normal matrix condition number {:.3e} at degree {lmax}",
                max / min.max(f64::MIN_POSITIVE)
            )));
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Conditioning("normal matrix not positive definite".into()))?;
        let projector = chol.solve(&aw);
        Ok(Self { lmax, projector })
    }

    /// `(lmax+1)² × n_samples` map from samples to coefficients.
    pub fn projector(&self) -> &DMatrix<Complex64> {
        &self.projector
    }

    pub fn n_samples(&self) -> usize {
        self.projector.ncols()
    }

    pub fn forward(&self, samples: &[f64]) -> Result<SphCoeffField> {
        if samples.len() != self.n_samples() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                self.n_samples(),
                samples.len()
            )));
        }
        let nk = n_coeffs(self.lmax);
        let mut out = vec![Complex64::new(0.0, 0.0); nk];
        for (j, s) in samples.iter().enumerate() {
            if *s == 0.0 {
                continue;
            }
            let col = self.projector.column(j);
            for k in 0..nk {
                out[k] += col[k] * *s;
            }
        }
        Ok(SphCoeffField {
            lmax: self.lmax,
            values: out,
        })
    }

    pub fn forward_complex(&self, samples: &[Complex64]) -> Result<SphCoeffField> {
        if samples.len() != self.n_samples() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                self.n_samples(),
                samples.len()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(samples);
        let c = &self.projector * v;
        Ok(SphCoeffField {
            lmax: self.lmax,
            values: c.as_slice().to_vec(),
        })
    }
}

/// Least-squares coefficients of real samples on `sampling`.
pub fn forward_transform(
    samples: &[f64],
    sampling: &OrientationSampling,
    lmax: usize,
) -> Result<SphCoeffField> {
    TransformPlan::new(sampling, lmax)?.forward(samples)
}

/// Pointwise synthesis `Σ c_{l,m} Y^{l,m}(n)`.
pub fn inverse_transform(coeffs: &SphCoeffField, directions: &[Vector3<f64>]) -> Vec<Complex64> {
    directions.iter().map(|d| coeffs.eval(d)).collect()
}
