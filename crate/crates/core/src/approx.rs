//! Gaussian approximation of the diffusion kernel through the logarithm on
//! SE(3), using the section `R_z(γ) R_y(β) R_z(-γ)` of `R³⋊S²`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{hat, polar_angles, rot_y, rot_z, vee};

/// Exponential coordinates `c¹ … c⁶` of a group element: spatial part first,
/// then the rotation vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LieCoeffs {
    pub c: [f64; 6],
    /// Rotation angle `|(c⁴, c⁵, c⁶)|`.
    pub q: f64,
}

impl LieCoeffs {
    pub fn spatial(&self) -> Vector3<f64> {
        Vector3::new(self.c[0], self.c[1], self.c[2])
    }

    pub fn rotational(&self) -> Vector3<f64> {
        Vector3::new(self.c[3], self.c[4], self.c[5])
    }

    /// The group element `exp(Σ cⁱ Aᵢ)` as (translation, rotation).
    pub fn exp(&self) -> (Vector3<f64>, Matrix3<f64>) {
        let w = self.rotational();
        let q = w.norm();
        let om = hat(&w);
        let om2 = om * om;
        let (a, b, c) = if q < 1e-4 {
            let q2 = q * q;
            (
                1.0 - q2 / 6.0 + q2 * q2 / 120.0,
                0.5 - q2 / 24.0 + q2 * q2 / 720.0,
                1.0 / 6.0 - q2 / 120.0 + q2 * q2 / 5040.0,
            )
        } else {
            (
                q.sin() / q,
                (1.0 - q.cos()) / (q * q),
                (q - q.sin()) / (q * q * q),
            )
        };
        let r = Matrix3::identity() + om * a + om2 * b;
        let v = Matrix3::identity() + om * b + om2 * c;
        (v * self.spatial(), r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxParams {
    pub d33: f64,
    pub d44: f64,
    pub t: f64,
    /// Weight of the commutator directions `c¹, c²`.
    pub xi: f64,
    /// The kernel is evaluated at time `t / time_scale`.
    pub time_scale: f64,
}

impl ApproxParams {
    pub fn new(d33: f64, d44: f64, t: f64) -> Self {
        Self {
            d33,
            d44,
            t,
            xi: 16.0,
            time_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("D33", self.d33),
            ("D44", self.d44),
            ("t", self.t),
            ("xi", self.xi),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.time_scale >= 1.0) || !self.time_scale.is_finite() {
            return Err(Error::Parameter(format!(
                "time scale {} must be at least 1",
                self.time_scale
            )));
        }
        Ok(())
    }
}

/// Logarithm of `(x, R)` on the principal branch.
pub fn se3_log(x: &Vector3<f64>, r: &Matrix3<f64>) -> Result<LieCoeffs> {
    let cos_q = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let q = cos_q.acos();
    let skew = (r - r.transpose()) * 0.5;
    let w = if q < 1e-6 {
        // sin q / q ≈ 1 - q²/6
        vee(&skew) * (1.0 + q * q / 6.0)
    } else {
        if PI - q < 1e-9 {
            return Err(Error::Branch { angle: q });
        }
        vee(&skew) * (q / q.sin())
    };
    let om = hat(&w);
    // (1 - (q/2)cot(q/2)) / q²  →  1/12 + q²/720 near 0
    let k = if q < 1e-3 {
        1.0 / 12.0 + q * q / 720.0
    } else {
        (1.0 - 0.5 * q / (0.5 * q).tan()) / (q * q)
    };
    let c1 = (Matrix3::identity() - om * 0.5 + om * om * k) * x;
    Ok(LieCoeffs {
        c: [c1.x, c1.y, c1.z, w.x, w.y, w.z],
        q,
    })
}

/// Smoothed weighted modulus `|c|_{D₃₃,D₄₄}`.
pub fn weighted_modulus(c: &LieCoeffs, p: &ApproxParams) -> f64 {
    let [c1, c2, c3, c4, c5, c6] = c.c;
    let inner = c3 * c3 / p.d33 + (c4 * c4 + c5 * c5) / p.d44;
    let s = (c1 * c1 + c2 * c2) / (p.xi * p.d33 * p.d44) + c6 * c6 / p.d44 + inner * inner;
    s.sqrt().sqrt()
}

/// Rotation `R_z(γ) R_y(β) R_z(-γ)` taking `e_z` to `n`.
pub fn symmetric_section(n: &Vector3<f64>) -> Matrix3<f64> {
    let (beta, gamma) = polar_angles(n);
    rot_z(gamma) * rot_y(beta) * rot_z(-gamma)
}

/// Gaussian approximation of the diffusion kernel at `(y, n)`.
/// The antipode of `e_z`, where the section is undefined, gets 0.
pub fn log_approx_kernel(y: &Vector3<f64>, n: &Vector3<f64>, p: &ApproxParams) -> Result<f64> {
    p.validate()?;
    let n = n.normalize();
    if n.z <= -1.0 + 1e-12 {
        return Ok(0.0);
    }
    let c = match se3_log(y, &symmetric_section(&n)) {
        Ok(c) => c,
        Err(Error::Branch { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    Ok(group_kernel(&c, p))
}

/// The group kernel as a function of exponential coordinates.
pub fn group_kernel(c: &LieCoeffs, p: &ApproxParams) -> f64 {
    let t = p.t / p.time_scale;
    let m = weighted_modulus(c, p);
    (-m * m / (4.0 * t)).exp() / (4.0 * PI * t * t * p.d33 * p.d44).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rot_axis_angle;
    use crate::sh::direction;
    use rand::{Rng, SeedableRng};

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn translation_and_rotation_only() {
        let x = Vector3::new(0.3, -1.2, 2.0);
        let c = se3_log(&x, &Matrix3::identity()).unwrap();
        assert_eq!(c.c, [0.3, -1.2, 2.0, 0.0, 0.0, 0.0]);
        let c = se3_log(&Vector3::zeros(), &rot_z(0.7)).unwrap();
        for (a, b) in c.c.iter().zip([0.0, 0.0, 0.0, 0.0, 0.0, 0.7]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(se3_log(&x, &rot_y(PI)), Err(Error::Branch { .. })));
    }

    #[test]
    fn exp_log_round_trip() {
        let mut g = rng(1);
        for _ in 0..1000 {
            let axis = Vector3::new(
                g.gen_range(-1.0..1.0),
                g.gen_range(-1.0..1.0),
                g.gen_range(-1.0..1.0),
            )
            .normalize();
            let angle = g.gen_range(0.0..3.0);
            let r = rot_axis_angle(&axis, angle);
            let x = Vector3::new(
                g.gen_range(-3.0..3.0),
                g.gen_range(-3.0..3.0),
                g.gen_range(-3.0..3.0),
            );
            let c = se3_log(&x, &r).unwrap();
            let (x2, r2) = c.exp();
            assert!((x2 - x).norm() < 1e-10 && (r2 - r).norm() < 1e-10);
            assert!((c.q - angle).abs() < 1e-10);
        }
    }

    #[test]
    fn exp_matches_ode_integration() {
        // independent oracle: integrate ẋ = Ω x + v, Ṙ = Ω R for unit time
        let c = LieCoeffs {
            c: [0.4, -0.3, 1.1, 0.5, -0.9, 0.2],
            q: 0.0,
        };
        let om = hat(&c.rotational());
        let v = c.spatial();
        let steps = 2000;
        let h = 1.0 / steps as f64;
        let (mut x, mut r) = (Vector3::zeros(), Matrix3::identity());
        let f = |_: &Vector3<f64>, r: &Matrix3<f64>| (r * v, r * om);
        for _ in 0..steps {
            let (k1x, k1r) = f(&x, &r);
            let (k2x, k2r) = f(&(x + k1x * (h / 2.0)), &(r + k1r * (h / 2.0)));
            let (k3x, k3r) = f(&(x + k2x * (h / 2.0)), &(r + k2r * (h / 2.0)));
            let (k4x, k4r) = f(&(x + k3x * h), &(r + k3r * h));
            x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
            r += (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0);
        }
        let (xe, re) = c.exp();
        assert!((xe - x).norm() < 1e-10 && (re - r).norm() < 1e-10);
    }

    #[test]
    fn modulus_examples_and_monotonicity() {
        let p = ApproxParams::new(1.5, 0.2, 1.0);
        assert_eq!(
            weighted_modulus(
                &LieCoeffs {
                    c: [0.0; 6],
                    q: 0.0
                },
                &p
            ),
            0.0
        );
        let c = LieCoeffs {
            c: [0.0, 0.0, -0.8, 0.0, 0.0, 0.0],
            q: 0.0,
        };
        assert!((weighted_modulus(&c, &p) - 0.8 / 1.5f64.sqrt()).abs() < 1e-15);
        let mut g = rng(2);
        for _ in 0..1000 {
            let mut a = [0.0f64; 6];
            a.iter_mut().for_each(|v| *v = g.gen_range(-2.0..2.0));
            let i = g.gen_range(0..6);
            let mut b = a;
            b[i] = a[i].signum() * (a[i].abs() + g.gen_range(0.0..1.0));
            let ma = weighted_modulus(&LieCoeffs { c: a, q: 0.0 }, &p);
            let mb = weighted_modulus(&LieCoeffs { c: b, q: 0.0 }, &p);
            assert!(mb >= ma);
        }
    }

    #[test]
    fn origin_value_and_c6_vanishes() {
        let p = ApproxParams::new(1.0, 0.24, 0.7);
        let k = log_approx_kernel(&Vector3::zeros(), &Vector3::z(), &p).unwrap();
        assert!((k - (4.0 * PI * 0.49 * 0.24f64).powi(-2)).abs() < 1e-12 * k);
        let mut g = rng(3);
        for _ in 0..1000 {
            let n = direction(g.gen_range(0.0..3.1), g.gen_range(-PI..PI));
            let y = Vector3::new(
                g.gen_range(-2.0..2.0),
                g.gen_range(-2.0..2.0),
                g.gen_range(-2.0..2.0),
            );
            let c = se3_log(&y, &symmetric_section(&n)).unwrap();
            assert!(c.c[5].abs() < 1e-12);
        }
    }

    #[test]
    fn both_symmetries_hold_pointwise() {
        let p = ApproxParams::new(1.0, 0.24, 0.7);
        let mut g = rng(4);
        for _ in 0..500 {
            let n = direction(g.gen_range(0.0..3.0), g.gen_range(-PI..PI));
            let y = Vector3::new(
                g.gen_range(-2.0..2.0),
                g.gen_range(-2.0..2.0),
                g.gen_range(-2.0..2.0),
            );
            let k = log_approx_kernel(&y, &n, &p).unwrap();
            let a = g.gen_range(0.0..2.0 * PI);
            let rz = rot_z(a);
            let k2 = log_approx_kernel(&(rz * y), &(rz * n), &p).unwrap();
            assert!((k - k2).abs() <= 1e-12 * k.max(1e-300) + 1e-300, "{k} {k2}");
            let r = symmetric_section(&n);
            let k3 =
                log_approx_kernel(&(-(r.transpose() * y)), &(r.transpose() * Vector3::z()), &p)
                    .unwrap();
            assert!((k - k3).abs() <= 1e-12 * k.max(1e-300) + 1e-300, "{k} {k3}");
        }
    }

    #[test]
    fn alpha_zero_section_keeps_c6() {
        let n = direction(0.9, 0.6);
        let y = Vector3::new(0.5, -0.4, 0.8);
        let (b, gm) = polar_angles(&n);
        let c = se3_log(&y, &(rot_z(gm) * rot_y(b))).unwrap();
        assert!(c.c[5].abs() > 0.1);
    }

    #[test]
    fn positive_and_decreasing() {
        let p = ApproxParams::new(1.0, 0.24, 0.7);
        let mut prev = f64::INFINITY;
        for s in 0..20 {
            let k = log_approx_kernel(&Vector3::new(0.0, 0.0, 0.2 * s as f64), &Vector3::z(), &p)
                .unwrap();
            assert!(k > 0.0 && k < prev);
            prev = k;
        }
        assert_eq!(
            log_approx_kernel(&Vector3::zeros(), &(-Vector3::z()), &p).unwrap(),
            0.0
        );
    }
}
