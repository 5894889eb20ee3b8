//! Propagation of fixed-order coefficient blocks in the reoriented basis.
//!
//! For a frequency of magnitude `r` the generator acts on order-`m`
//! coefficients as `-A` with
//!
//! * diffusion: `A = D₃₃ r² M₁ + D₄₄ Λ`
//! * elliptic:  `A = (D₃₃ - D₁₁) r² M₁ + D₄₄ Λ + D₁₁ r² I`
//! * completion: `A = D₄₄ Λ + i r M₂`
//!
//! Time evolution is `e^{-At}`, the resolvent `α(αI + A)⁻¹` and the
//! Γ-distributed travel time kernel its `k`-th power.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm, tridiagonal_solve};
use crate::sh::SphCoeffVector;
use crate::spectral::{build_lambda, build_m1, build_m2, gswe_eigensystem, swe_eigensystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Process {
    Diffusion,
    Completion,
    Elliptic,
}

impl std::fmt::Display for Process {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Process::Diffusion => "diffusion",
            Process::Completion => "completion",
            Process::Elliptic => "elliptic",
        })
    }
}

impl std::str::FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diffusion" => Ok(Process::Diffusion),
            "completion" => Ok(Process::Completion),
            "elliptic" => Ok(Process::Elliptic),
            _ => Err(Error::Parameter(format!("unknown process '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessParams {
    pub process: Process,
    pub d33: f64,
    pub d44: f64,
    pub d11: f64,
    pub t: f64,
    pub alpha: f64,
    pub gamma_k: u32,
}

impl ProcessParams {
    pub fn diffusion(d33: f64, d44: f64, t: f64) -> Self {
        Self {
            process: Process::Diffusion,
            d33,
            d44,
            d11: 0.0,
            t,
            alpha: 1.0,
            gamma_k: 1,
        }
    }

    pub fn completion(d44: f64, t: f64) -> Self {
        Self {
            process: Process::Completion,
            d33: 0.0,
            d44,
            d11: 0.0,
            t,
            alpha: 1.0,
            gamma_k: 1,
        }
    }

    pub fn elliptic(d33: f64, d11: f64, d44: f64, t: f64) -> Self {
        Self {
            process: Process::Elliptic,
            d33,
            d44,
            d11,
            t,
            alpha: 1.0,
            gamma_k: 1,
        }
    }

    pub fn with_alpha(mut self, alpha: f64, gamma_k: u32) -> Self {
        self.alpha = alpha;
        self.gamma_k = gamma_k;
        self
    }

    /// Diffusivities consistent with the process type.
    pub fn validate(&self) -> Result<()> {
        if !(self.d44 > 0.0) || !self.d44.is_finite() {
            return Err(Error::Parameter(format!(
                "D44 = {} must be positive",
                self.d44
            )));
        }
        match self.process {
            Process::Diffusion | Process::Elliptic
                if !(self.d33 > 0.0) || !self.d33.is_finite() =>
            {
                return Err(Error::Parameter(format!(
                    "D33 = {} must be positive",
                    self.d33
                )));
            }
            Process::Elliptic if !(self.d11 > 0.0 && self.d11 < self.d33) => {
                return Err(Error::Parameter(format!(
                    "elliptic case needs 0 < D11 < D33, got D11 = {}, D33 = {}",
                    self.d11, self.d33
                )));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn validate_time(&self) -> Result<()> {
        self.validate()?;
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::Parameter(format!(
                "t = {} must be non-negative",
                self.t
            )));
        }
        Ok(())
    }

    pub fn validate_resolvent(&self) -> Result<()> {
        self.validate()?;
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Parameter(format!(
                "alpha = {} must be positive",
                self.alpha
            )));
        }
        if self.gamma_k < 1 {
            return Err(Error::Parameter("gamma_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// What a propagator integrates over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Fixed time `t`.
    Time(f64),
    /// Γ(k, α) distributed travel time; `k = 1` is the resolvent.
    Gamma { alpha: f64, k: u32 },
}

/// Which of the two independent numerical routes builds a propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Default: symmetric eigenbasis for diffusion, Padé exponential and
    /// banded solves for completion.
    Default,
    /// Eigen-expansion everywhere (GSWE eigenbasis for completion).
    Eigen,
    /// Dense matrix exponential / banded solve everywhere.
    Direct,
}

fn radius_check(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "frequency magnitude {r} must be non-negative"
        )));
    }
    Ok(())
}

/// Dense generator `A` of order `m` at frequency magnitude `r`.
pub fn generator_matrix(
    m: i64,
    r: f64,
    p: &ProcessParams,
    lmax: usize,
) -> Result<DMatrix<Complex64>> {
    let lam = build_lambda(m, lmax)?.to_dense() * p.d44;
    let a = match p.process {
        Process::Diffusion => build_m1(m, lmax)?.to_dense() * (p.d33 * r * r) + lam,
        Process::Elliptic => {
            let n = lam.nrows();
            build_m1(m, lmax)?.to_dense() * ((p.d33 - p.d11) * r * r)
                + lam
                + DMatrix::identity(n, n) * (p.d11 * r * r)
        }
        Process::Completion => {
            let m2 = build_m2(m, lmax)?
                .to_dense()
                .map(|v| Complex64::new(0.0, r * v));
            return Ok(lam.map(|v| Complex64::new(v, 0.0)) + m2);
        }
    };
    Ok(a.map(|v| Complex64::new(v, 0.0)))
}

fn scalar_factor(lambda: Complex64, h: Horizon) -> Complex64 {
    match h {
        Horizon::Time(t) => (-lambda * t).exp(),
        Horizon::Gamma { alpha, k } => {
            let f = Complex64::new(alpha, 0.0) / (lambda + alpha);
            f.powu(k)
        }
    }
}

/// Propagator of order `m` at frequency magnitude `r` as a dense matrix.
pub fn propagator_matrix(
    m: i64,
    r: f64,
    p: &ProcessParams,
    lmax: usize,
    horizon: Horizon,
    route: Route,
) -> Result<DMatrix<Complex64>> {
    radius_check(r)?;
    match horizon {
        Horizon::Time(_) => p.validate_time()?,
        Horizon::Gamma { alpha, k } => ProcessParams {
            alpha,
            gamma_k: k,
            ..*p
        }
        .validate_resolvent()?,
    }
    match (p.process, route) {
        (Process::Diffusion | Process::Elliptic, Route::Default | Route::Eigen) => {
            symmetric_propagator(m, r, p, lmax, horizon)
        }
        (Process::Completion, Route::Eigen) => gswe_propagator(m, r, p, lmax, horizon),
        (Process::Completion, Route::Default) => match horizon {
            Horizon::Time(_) => direct_propagator(m, r, p, lmax, horizon),
            Horizon::Gamma { .. } => banded_resolvent_power(m, r, p, lmax, horizon),
        },
        (_, Route::Direct) => match horizon {
            Horizon::Time(_) => direct_propagator(m, r, p, lmax, horizon),
            Horizon::Gamma { .. } => banded_resolvent_power(m, r, p, lmax, horizon),
        },
    }
}

fn symmetric_propagator(
    m: i64,
    r: f64,
    p: &ProcessParams,
    lmax: usize,
    h: Horizon,
) -> Result<DMatrix<Complex64>> {
    let (d33, shift) = match p.process {
        Process::Elliptic => (p.d33 - p.d11, p.d11 * r * r),
        _ => (p.d33, 0.0),
    };
    let rho = (d33 / p.d44).sqrt() * r;
    let es = swe_eigensystem(m, rho, lmax)?;
    let n = es.len();
    let v = es.vectors.map(|c| c.re);
    let f: Vec<f64> = es
        .eigenvalues
        .iter()
        .map(|l| scalar_factor(Complex64::new(p.d44 * l.re + shift, 0.0), h).re)
        .collect();
    let vf = DMatrix::from_fn(n, n, |i, j| v[(i, j)] * f[j]);
    Ok((vf * v.transpose()).map(|x| Complex64::new(x, 0.0)))
}

fn gswe_propagator(
    m: i64,
    r: f64,
    p: &ProcessParams,
    lmax: usize,
    h: Horizon,
) -> Result<DMatrix<Complex64>> {
    let rho = r / p.d44;
    let es = gswe_eigensystem(m, rho, lmax)?;
    if es.near_defective {
        return Err(Error::Singular(format!(
            "eigenbasis of order {m} is nearly defective at rho = {rho}"
        )));
    }
    let n = es.len();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let c = es.vectors.column(k);
        let f = scalar_factor(es.eigenvalues[k] * p.d44, h) / es.gram[k];
        out += (c * c.transpose()) * f;
    }
    Ok(out)
}

fn direct_propagator(
    m: i64,
    r: f64,
    p: &ProcessParams,
    lmax: usize,
    h: Horizon,
) -> Result<DMatrix<Complex64>> {
    let a = generator_matrix(m, r, p, lmax)?;
    match h {
        Horizon::Time(t) => Ok(expm(&(a * Complex64::new(-t, 0.0)))),
        Horizon::Gamma { .. } => banded_resolvent_power(m, r, p, lmax, h),
    }
}

fn banded_resolvent_power(
    m: i64,
    r: f64,
    p: &ProcessParams,
    lmax: usize,
    h: Horizon,
) -> Result<DMatrix<Complex64>> {
    let Horizon::Gamma { alpha, k } = h else {
        unreachable!("resolvent requested for a time horizon")
    };
    let a = generator_matrix(m, r, p, lmax)?;
    let n = a.nrows();
    let mut out = DMatrix::<Complex64>::identity(n, n);
    for col in 0..n {
        let mut v: Vec<Complex64> = out.column(col).iter().copied().collect();
        for _ in 0..k {
            v = resolvent_solve(&a, alpha, &v)?;
        }
        out.set_column(col, &DVector::from_vec(v));
    }
    Ok(out)
}

/// Solve `(αI + A) w = α u` for a tridiagonal or pentadiagonal `A`.
fn resolvent_solve(a: &DMatrix<Complex64>, alpha: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let rhs: Vec<Complex64> = u.iter().map(|x| x * alpha).collect();
    let is_tri =
        (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || a[(i, j)] == Complex64::new(0.0, 0.0)));
    if is_tri {
        let sub: Vec<Complex64> = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
        let sup: Vec<Complex64> = (0..n.saturating_sub(1)).map(|i| a[(i, i + 1)]).collect();
        let diag: Vec<Complex64> = (0..n).map(|i| a[(i, i)] + alpha).collect();
        return tridiagonal_solve(&sub, &diag, &sup, &rhs);
    }
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += alpha;
    }
    shifted
        .lu()
        .solve(&DVector::from_vec(rhs))
        .map(|v| v.as_slice().to_vec())
        .ok_or_else(|| Error::Singular(format!("resolvent with alpha = {alpha}")))
}

fn apply(mat: &DMatrix<Complex64>, u: &SphCoeffVector) -> Result<SphCoeffVector> {
    if mat.ncols() != u.values.len() {
        return Err(Error::Shape(format!(
            "block of length {} for a {}-column propagator",
            u.values.len(),
            mat.ncols()
        )));
    }
    let w = mat * DVector::from_column_slice(&u.values);
    Ok(SphCoeffVector {
        m: u.m,
        lmax: u.lmax,
        values: w.as_slice().to_vec(),
    })
}

fn require(p: &ProcessParams, process: Process) -> Result<()> {
    if p.process != process {
        return Err(Error::Parameter(format!(
            "expected {process} parameters, got {}",
            p.process
        )));
    }
    Ok(())
}

/// `e^{-(D₃₃r²M₁ + D₄₄Λ)t} û` via the SWE eigenbasis.
pub fn evolve_diffusion(u: &SphCoeffVector, r: f64, p: &ProcessParams) -> Result<SphCoeffVector> {
    require(p, Process::Diffusion)?;
    apply(
        &propagator_matrix(u.m, r, p, u.lmax, Horizon::Time(p.t), Route::Default)?,
        u,
    )
}

/// `α(αI + D₃₃r²M₁ + D₄₄Λ)⁻¹ û` via the SWE eigenbasis.
pub fn resolvent_diffusion(
    u: &SphCoeffVector,
    r: f64,
    p: &ProcessParams,
) -> Result<SphCoeffVector> {
    require(p, Process::Diffusion)?;
    let h = Horizon::Gamma {
        alpha: p.alpha,
        k: 1,
    };
    apply(&propagator_matrix(u.m, r, p, u.lmax, h, Route::Default)?, u)
}

/// `e^{-(D₄₄Λ + irM₂)t} û` by Padé scaling and squaring.
pub fn evolve_completion(u: &SphCoeffVector, r: f64, p: &ProcessParams) -> Result<SphCoeffVector> {
    require(p, Process::Completion)?;
    apply(
        &propagator_matrix(u.m, r, p, u.lmax, Horizon::Time(p.t), Route::Default)?,
        u,
    )
}

/// Solve `(αI + D₄₄Λ + irM₂) ŵ = α û` by banded LU.
pub fn resolvent_completion(
    u: &SphCoeffVector,
    r: f64,
    p: &ProcessParams,
) -> Result<SphCoeffVector> {
    require(p, Process::Completion)?;
    radius_check(r)?;
    p.validate_resolvent()?;
    let a = generator_matrix(u.m, r, p, u.lmax)?;
    let values = resolvent_solve(&a, p.alpha, &u.values)?;
    Ok(SphCoeffVector {
        m: u.m,
        lmax: u.lmax,
        values,
    })
}

/// Completion resolvent by the GSWE eigen-expansion; fails close to a
/// branch point where the eigenbasis degenerates.
pub fn resolvent_completion_eigen(
    u: &SphCoeffVector,
    r: f64,
    p: &ProcessParams,
) -> Result<SphCoeffVector> {
    require(p, Process::Completion)?;
    let h = Horizon::Gamma {
        alpha: p.alpha,
        k: 1,
    };
    apply(&propagator_matrix(u.m, r, p, u.lmax, h, Route::Eigen)?, u)
}

/// Elliptic diffusion: the hypo-elliptic propagator with `r² D₃₃` replaced
/// by `r² (D₃₃ - D₁₁)`, damped by `e^{-r²D₁₁t}`.
pub fn evolve_elliptic(u: &SphCoeffVector, r: f64, p: &ProcessParams) -> Result<SphCoeffVector> {
    require(p, Process::Elliptic)?;
    apply(
        &propagator_matrix(u.m, r, p, u.lmax, Horizon::Time(p.t), Route::Default)?,
        u,
    )
}

/// `[α(αI + A)⁻¹]^k û` for the generator of `p.process`.
pub fn gamma_resolvent(u: &SphCoeffVector, r: f64, p: &ProcessParams) -> Result<SphCoeffVector> {
    let h = Horizon::Gamma {
        alpha: p.alpha,
        k: p.gamma_k,
    };
    apply(&propagator_matrix(u.m, r, p, u.lmax, h, Route::Default)?, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_laguerre;

    fn unit_block(m: i64, lmax: usize) -> SphCoeffVector {
        let n = crate::sh::block_len(m, lmax);
        let values = (0..n)
            .map(|j| Complex64::new(1.0 / (1.0 + j as f64), 0.3 * j as f64 - 0.5))
            .collect();
        SphCoeffVector { m, lmax, values }
    }

    fn close(a: &SphCoeffVector, b: &SphCoeffVector, tol: f64) -> bool {
        a.values
            .iter()
            .zip(&b.values)
            .all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn zero_frequency_scaling() {
        let u = unit_block(1, 8);
        let p = ProcessParams::diffusion(1.0, 0.1, 2.0);
        let w = evolve_diffusion(&u, 0.0, &p).unwrap();
        for (j, (a, b)) in w.values.iter().zip(&u.values).enumerate() {
            let l = (1 + j) as f64;
            assert!((a - b * (-0.1 * l * (l + 1.0) * 2.0).exp()).norm() < 1e-14);
        }
        let w = resolvent_diffusion(&u, 0.0, &p.with_alpha(0.7, 1)).unwrap();
        for (j, (a, b)) in w.values.iter().zip(&u.values).enumerate() {
            let l = (1 + j) as f64;
            assert!((a - b * 0.7 / (0.7 + 0.1 * l * (l + 1.0))).norm() < 1e-14);
        }
        let c = ProcessParams::completion(0.1, 2.0);
        let w2 = evolve_completion(&u, 0.0, &c).unwrap();
        assert!(close(&w2, &evolve_diffusion(&u, 0.0, &p).unwrap(), 1e-13));
        let w3 = resolvent_completion(&u, 0.0, &c.with_alpha(0.7, 1)).unwrap();
        assert!(close(
            &w3,
            &resolvent_diffusion(&u, 0.0, &p.with_alpha(0.7, 1)).unwrap(),
            1e-14
        ));
        let g = gamma_resolvent(&u, 0.0, &p.with_alpha(0.7, 2)).unwrap();
        for (j, (a, b)) in g.values.iter().zip(&u.values).enumerate() {
            let l = (1 + j) as f64;
            assert!((a - b * (0.7 / (0.7 + 0.1 * l * (l + 1.0))).powi(2)).norm() < 1e-14);
        }
    }

    #[test]
    fn time_zero_is_identity_and_semigroup() {
        let u = unit_block(0, 8);
        let p = ProcessParams::diffusion(1.0, 0.2, 0.0);
        assert!(close(&evolve_diffusion(&u, 2.3, &p).unwrap(), &u, 1e-14));
        for (proc_a, proc_b) in [
            (
                ProcessParams::diffusion(1.0, 0.2, 0.4),
                ProcessParams::diffusion(1.0, 0.2, 1.1),
            ),
            (
                ProcessParams::completion(0.2, 0.4),
                ProcessParams::completion(0.2, 1.1),
            ),
        ] {
            let both = ProcessParams { t: 1.5, ..proc_a };
            let f = |p: &ProcessParams, v: &SphCoeffVector| match p.process {
                Process::Diffusion => evolve_diffusion(v, 2.3, p).unwrap(),
                _ => evolve_completion(v, 2.3, p).unwrap(),
            };
            let two = f(&proc_b, &f(&proc_a, &u));
            assert!(close(&two, &f(&both, &u), 1e-10));
        }
    }

    #[test]
    fn diffusion_matches_dense_exponential() {
        let p = ProcessParams::diffusion(1.0, 0.1, 2.0);
        for m in [0, 3] {
            let a = propagator_matrix(m, 1.7, &p, 8, Horizon::Time(2.0), Route::Default).unwrap();
            let b = propagator_matrix(m, 1.7, &p, 8, Horizon::Time(2.0), Route::Direct).unwrap();
            assert!((a - b).map(|c| c.norm()).max() < 1e-12);
        }
    }

    #[test]
    fn completion_contracts() {
        let u = unit_block(2, 8);
        let p = ProcessParams::completion(0.3, 1.3);
        for r in [0.5, 2.0, 9.0] {
            let w = evolve_completion(&u, r, &p).unwrap();
            assert!(w.norm() <= u.norm() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn laplace_quadrature_matches_resolvent() {
        let (xs, ws) = gauss_laguerre(64);
        let u = unit_block(0, 8);
        let alpha = 1.0;
        let p = ProcessParams::diffusion(1.0, 0.1, 0.0).with_alpha(alpha, 1);
        for r in [0.0, 1.0] {
            let mut acc = vec![Complex64::new(0.0, 0.0); u.values.len()];
            for (x, w) in xs.iter().zip(&ws) {
                let pt = ProcessParams { t: x / alpha, ..p };
                let v = evolve_diffusion(&u, r, &pt).unwrap();
                for (a, b) in acc.iter_mut().zip(&v.values) {
                    *a += b * *w;
                }
            }
            let res = resolvent_diffusion(&u, r, &p).unwrap();
            for (a, b) in acc.iter().zip(&res.values) {
                assert!((a - b).norm() < 1e-8, "r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigen_route_matches_banded_solve() {
        let u = unit_block(1, 10);
        let p = ProcessParams::completion(0.5, 1.0).with_alpha(0.4, 1);
        for r in [0.2, 1.3, 3.7] {
            let a = resolvent_completion(&u, r, &p).unwrap();
            let b = resolvent_completion_eigen(&u, r, &p).unwrap();
            assert!(close(&a, &b, 1e-8), "r={r}");
        }
    }

    #[test]
    fn elliptic_limits() {
        let u = unit_block(0, 8);
        let d = ProcessParams::diffusion(1.0, 0.1, 2.0);
        let e = ProcessParams::elliptic(1.0, 1e-13, 0.1, 2.0);
        let a = evolve_elliptic(&u, 1.5, &e).unwrap();
        let b = evolve_diffusion(&u, 1.5, &d).unwrap();
        assert!(close(&a, &b, 1e-10));
        assert!(close(
            &evolve_elliptic(&u, 0.0, &ProcessParams { d11: 0.4, ..e }).unwrap(),
            &evolve_diffusion(&u, 0.0, &d).unwrap(),
            1e-14
        ));
        assert!(evolve_elliptic(&u, 1.0, &ProcessParams { d11: 1.0, ..e }).is_err());
    }

    #[test]
    fn elliptic_matches_sin_squared_operator() {
        // −D₁₁ r² sin²β acts as −D₁₁ r² (I − M₁) in the Legendre basis
        let e = ProcessParams::elliptic(1.0, 0.3, 0.1, 1.4);
        let (m, r, lmax) = (2, 1.1, 8);
        let m1 = build_m1(m, lmax).unwrap().to_dense();
        let n = m1.nrows();
        let a = m1.clone() * (e.d33 * r * r)
            + build_lambda(m, lmax).unwrap().to_dense() * e.d44
            + (DMatrix::identity(n, n) - m1) * (e.d11 * r * r);
        let want = expm(&a.map(|v| Complex64::new(-v * e.t, 0.0)));
        let got = propagator_matrix(m, r, &e, lmax, Horizon::Time(e.t), Route::Default).unwrap();
        assert!((want - got).map(|c| c.norm()).max() < 1e-12);
    }

    #[test]
    fn mass_and_linearity() {
        let mut u = SphCoeffVector::zeros(0, 6);
        u.values[0] = Complex64::new(2.0, 0.0);
        let p = ProcessParams::completion(0.3, 0.8).with_alpha(0.5, 3);
        assert!((evolve_completion(&u, 0.0, &p).unwrap().values[0] - 2.0).norm() < 1e-14);
        assert!((gamma_resolvent(&u, 0.0, &p).unwrap().values[0] - 2.0).norm() < 1e-14);
        let z = SphCoeffVector::zeros(0, 6);
        assert!(gamma_resolvent(&z, 1.0, &p).unwrap().norm() == 0.0);
    }

    #[test]
    fn parameter_validation() {
        let u = unit_block(0, 4);
        let bad = ProcessParams::diffusion(1.0, 0.0, 1.0);
        assert!(evolve_diffusion(&u, 1.0, &bad).is_err());
        let p = ProcessParams::completion(0.3, 1.0).with_alpha(0.0, 1);
        assert!(resolvent_completion(&u, 1.0, &p).is_err());
        assert!(evolve_diffusion(&u, 1.0, &ProcessParams::completion(0.3, 1.0)).is_err());
    }
}
