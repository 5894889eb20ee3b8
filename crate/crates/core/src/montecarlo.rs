//! Random walks of the two stochastic processes and histogram estimates of
//! their densities.
//!
//! Each walk starts at `(0, e_z)` and takes `N` steps. Per step the
//! orientation is tilted by `β σ` (`β ~ N(0,1)`) towards the tangent direction
//! at angle `γ ~ U(0, π)`. The spatial step is `ε √(2 t D₃₃ / N) n`
//! (`ε ~ N(0,1)`) for diffusion and `(t/N) n` for completion.

use std::io::Write;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::Process;
use crate::field::R3S2Field;
use crate::geometry::tangent_basis;
use crate::sh::OrientationSampling;

/// Travel time of every walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TravelTime {
    Fixed(f64),
    /// Γ(k, α) distributed, `k = 1` exponential with mean `1/α`.
    Gamma {
        alpha: f64,
        k: u32,
    },
}

/// Angular step width per step of length `t/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngularStep {
    /// `σ = √(4 t D₄₄ / N)`, matching the generator `D₄₄ Δ_{S²}`.
    #[default]
    Generator,
    /// `σ = √(2 t D₄₄ / N)`.
    Halved,
}

/// Spatial step of the completion process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompletionStep {
    /// `(t/N) n`: unit speed.
    #[default]
    Linear,
    /// `√(t/N) n`.
    SquareRoot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub process: Process,
    pub walks: usize,
    pub steps: usize,
    pub travel: TravelTime,
    pub d33: f64,
    pub d44: f64,
    pub seed: u64,
    pub angular_step: AngularStep,
    pub completion_step: CompletionStep,
}

impl WalkConfig {
    pub fn diffusion(d33: f64, d44: f64, t: f64, walks: usize, steps: usize, seed: u64) -> Self {
        Self {
            process: Process::Diffusion,
            walks,
            steps,
            travel: TravelTime::Fixed(t),
            d33,
            d44,
            seed,
            angular_step: AngularStep::default(),
            completion_step: CompletionStep::default(),
        }
    }

    pub fn completion(d44: f64, t: f64, walks: usize, steps: usize, seed: u64) -> Self {
        Self {
            process: Process::Completion,
            d33: 0.0,
            ..Self::diffusion(0.0, d44, t, walks, steps, seed)
        }
    }

    pub fn with_gamma(mut self, alpha: f64, k: u32) -> Self {
        self.travel = TravelTime::Gamma { alpha, k };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.walks == 0 || self.steps == 0 {
            return Err(Error::Parameter(
                "walk and step counts must be at least 1".into(),
            ));
        }
        if self.process == Process::Elliptic {
            return Err(Error::Parameter(
                "random walks cover diffusion and completion only".into(),
            ));
        }
        if !(self.d44 >= 0.0)
            || !(self.d33 >= 0.0)
            || !self.d33.is_finite()
            || !self.d44.is_finite()
        {
            return Err(Error::Parameter(
                "diffusivities must be non-negative".into(),
            ));
        }
        match self.travel {
            TravelTime::Fixed(t) if !(t >= 0.0) || !t.is_finite() => Err(Error::Parameter(
                format!("travel time {t} must be non-negative"),
            )),
            TravelTime::Gamma { alpha, k } if !(alpha > 0.0) || !alpha.is_finite() || k == 0 => {
                Err(Error::Parameter(format!(
                    "Gamma travel time needs alpha > 0 and k >= 1, got {alpha}, {k}"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub y: Vector3<f64>,
    pub n: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalkBatch {
    pub config: WalkConfig,
    pub endpoints: Vec<Endpoint>,
    /// Travel time drawn for each walk.
    pub times: Vec<f64>,
}

fn walk_rng(seed: u64, walk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk as u64);
    rng
}

fn one_walk(cfg: &WalkConfig, rng: &mut ChaCha8Rng, t: f64) -> Endpoint {
    let n_steps = cfg.steps as f64;
    let sigma = match cfg.angular_step {
        AngularStep::Generator => (4.0 * t * cfg.d44 / n_steps).sqrt(),
        AngularStep::Halved => (2.0 * t * cfg.d44 / n_steps).sqrt(),
    };
    let spatial = match (cfg.process, cfg.completion_step) {
        (Process::Completion, CompletionStep::Linear) => t / n_steps,
        (Process::Completion, CompletionStep::SquareRoot) => (t / n_steps).sqrt(),
        _ => (2.0 * t * cfg.d33 / n_steps).sqrt(),
    };
    let mut y = Vector3::zeros();
    let mut n = Vector3::z();
    for _ in 0..cfg.steps {
        let eps: f64 = if cfg.process == Process::Completion {
            1.0
        } else {
            StandardNormal.sample(rng)
        };
        y += n * (eps * spatial);
        let beta: f64 = StandardNormal.sample(rng);
        let gamma = rng.gen::<f64>() * std::f64::consts::PI;
        if sigma > 0.0 {
            let theta = beta * sigma;
            let (e1, e2) = tangent_basis(&n);
            n = (n * theta.cos() + (e1 * gamma.cos() + e2 * gamma.sin()) * theta.sin()).normalize();
        }
    }
    Endpoint { y, n }
}

fn draw_time(travel: TravelTime, rng: &mut ChaCha8Rng) -> f64 {
    match travel {
        TravelTime::Fixed(t) => t,
        TravelTime::Gamma { alpha, k: 1 } => Exp::new(alpha).expect("validated rate").sample(rng),
        TravelTime::Gamma { alpha, k } => Gamma::new(k as f64, 1.0 / alpha)
            .expect("validated shape")
            .sample(rng),
    }
}

/// Simulate all walks. Walk `i` uses stream `i` of the seeded generator, so
/// the result does not depend on thread scheduling.
pub fn simulate(cfg: &WalkConfig) -> Result<RandomWalkBatch> {
    cfg.validate()?;
    let out: Vec<(Endpoint, f64)> = (0..cfg.walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = walk_rng(cfg.seed, i);
            let t = draw_time(cfg.travel, &mut rng);
            (one_walk(cfg, &mut rng, t), t)
        })
        .collect();
    let (endpoints, times) = out.into_iter().unzip();
    Ok(RandomWalkBatch {
        config: *cfg,
        endpoints,
        times,
    })
}

/// Walks with Γ(k, α) distributed travel time.
pub fn simulate_resolvent(cfg: &WalkConfig, alpha: f64, k: u32) -> Result<RandomWalkBatch> {
    simulate(&cfg.with_gamma(alpha, k))
}

/// Endpoints as `y.x y.y y.z n.x n.y n.z` little-endian f64 records.
pub fn write_endpoints<W: Write>(batch: &RandomWalkBatch, w: &mut W) -> Result<()> {
    for e in &batch.endpoints {
        for v in e.y.iter().chain(e.n.iter()) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_endpoints(bytes: &[u8]) -> Result<Vec<Endpoint>> {
    if !bytes.len().is_multiple_of(48) {
        let whole = bytes.len() / 48 * 48;
        return Err(Error::Truncated {
            offset: whole as u64,
            needed: 48,
            available: (bytes.len() - whole) as u64,
        });
    }
    Ok(bytes
        .chunks_exact(48)
        .map(|r| {
            let f = |i: usize| {
                f64::from_le_bytes(r[8 * i..8 * i + 8].try_into().expect("8-byte slice"))
            };
            Endpoint {
                y: Vector3::new(f(0), f(1), f(2)),
                n: Vector3::new(f(3), f(4), f(5)),
            }
        })
        .collect())
}

/// Centered spatial bins, laid out like [`R3S2Field`] voxels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialBins {
    pub dims: [usize; 3],
    pub voxel_size: f64,
}

impl SpatialBins {
    pub fn cubic(n: usize, voxel_size: f64) -> Self {
        Self {
            dims: [n; 3],
            voxel_size,
        }
    }

    pub fn locate(&self, y: &Vector3<f64>) -> Option<usize> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let c = (self.dims[a] as f64 - 1.0) / 2.0;
            let u = (y[a] / self.voxel_size + c + 0.5).floor();
            if !(u >= 0.0 && u < self.dims[a] as f64) {
                return None;
            }
            idx[a] = u as usize;
        }
        Some(idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramField {
    /// Density per voxel and orientation cell; cell weights are the solid
    /// angles of the nearest-vertex cells.
    pub field: R3S2Field,
    pub counts: Vec<u64>,
    pub inside: usize,
    pub outside: usize,
}

/// Bin endpoints into spatial voxels × nearest-vertex cells of the refined
/// icosahedron, normalized to unit mass over the endpoints inside the grid.
pub fn bin(
    batch: &RandomWalkBatch,
    bins: &SpatialBins,
    sphere_refinement: usize,
) -> Result<HistogramField> {
    bin_endpoints(
        &batch.endpoints,
        bins,
        &OrientationSampling::icosahedral(sphere_refinement),
    )
}

pub fn bin_endpoints(
    endpoints: &[Endpoint],
    bins: &SpatialBins,
    sampling: &OrientationSampling,
) -> Result<HistogramField> {
    if endpoints.is_empty() {
        return Err(Error::Parameter("no endpoints to bin".into()));
    }
    let nv = bins.dims.iter().product::<usize>();
    let slots: Vec<Option<usize>> = endpoints
        .par_iter()
        .map(|e| bins.locate(&e.y).map(|v| sampling.nearest(&e.n) * nv + v))
        .collect();
    let mut counts = vec![0u64; nv * sampling.len()];
    let mut inside = 0;
    for s in slots.iter().flatten() {
        counts[*s] += 1;
        inside += 1;
    }
    let outside = endpoints.len() - inside;
    let h3 = bins.voxel_size.powi(3);
    let norm = if inside > 0 {
        1.0 / (inside as f64 * h3)
    } else {
        0.0
    };
    let values = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * norm / sampling.weights[i / nv])
        .collect();
    let field = R3S2Field::from_samples(bins.dims, bins.voxel_size, sampling.clone(), values)?;
    Ok(HistogramField {
        field,
        counts,
        inside,
        outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn frozen_orientation_gives_axial_gaussian() {
        let cfg = WalkConfig::diffusion(1.0, 0.0, 2.0, 20_000, 50, 11);
        let b = simulate(&cfg).unwrap();
        let mut var = 0.0;
        for e in &b.endpoints {
            assert_eq!(e.n, Vector3::z());
            assert_eq!((e.y.x, e.y.y), (0.0, 0.0));
            var += e.y.z * e.y.z;
        }
        var /= b.endpoints.len() as f64;
        // variance 2 t D33 = 4; sample variance has sd ≈ 4·√(2/M)
        assert!(
            (var - 4.0).abs() < 4.0 * 4.0 * (2.0 / 20_000f64).sqrt(),
            "{var}"
        );
    }

    #[test]
    fn orientation_mean_decays_like_first_harmonic() {
        // E[n·e_z] = exp(-2 D44 t) for Brownian motion generated by D44 Δ
        let (d44, t) = (0.3, 1.0);
        let cfg = WalkConfig::diffusion(0.0, d44, t, 40_000, 400, 3);
        let b = simulate(&cfg).unwrap();
        let m = b.endpoints.iter().map(|e| e.n.z).sum::<f64>() / b.endpoints.len() as f64;
        let want = (-2.0 * d44 * t).exp();
        // sd of n_z is below 1
        assert!((m - want).abs() < 4.0 / (40_000f64).sqrt(), "{m} vs {want}");
        let halved = WalkConfig {
            angular_step: AngularStep::Halved,
            ..cfg
        };
        let m2 = simulate(&halved)
            .unwrap()
            .endpoints
            .iter()
            .map(|e| e.n.z)
            .sum::<f64>()
            / 40_000.0;
        assert!(
            (m2 - (-d44 * t).exp()).abs() < 4.0 / (40_000f64).sqrt(),
            "{m2}"
        );
    }

    #[test]
    fn mean_position_vanishes_and_units_hold() {
        let cfg = WalkConfig::diffusion(1.0, 0.1, 2.0, 100_000, 20, 5);
        let b = simulate(&cfg).unwrap();
        let m = b.endpoints.len() as f64;
        let mean = b.endpoints.iter().fold(Vector3::zeros(), |a, e| a + e.y) / m;
        let var = b
            .endpoints
            .iter()
            .fold(Vector3::zeros(), |a, e| a + e.y.component_mul(&e.y))
            / m;
        for a in 0..3 {
            assert!(
                mean[a].abs() < 4.0 * (var[a] / m).sqrt(),
                "axis {a}: {}",
                mean[a]
            );
        }
        assert!(b.endpoints.iter().all(|e| (e.n.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn seed_determines_output() {
        let cfg = WalkConfig::completion(0.5, 1.0, 500, 30, 42);
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let other = WalkConfig { seed: 43, ..cfg };
        assert_ne!(
            simulate(&cfg).unwrap().endpoints,
            simulate(&other).unwrap().endpoints
        );
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b3 = pool.install(|| simulate(&cfg).unwrap());
        assert_eq!(b3, simulate(&cfg).unwrap());
    }

    #[test]
    fn completion_moves_forward_at_unit_speed() {
        let cfg = WalkConfig::completion(0.0, 1.5, 10, 40, 1);
        for e in simulate(&cfg).unwrap().endpoints {
            assert!((e.y - Vector3::new(0.0, 0.0, 1.5)).norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_and_gamma_travel_times() {
        let base = WalkConfig::completion(0.5, 0.0, 20_000, 1, 8);
        let b = simulate_resolvent(&base, 0.25, 1).unwrap();
        let mean = b.times.iter().sum::<f64>() / b.times.len() as f64;
        // sd of Exp(α) is 1/α
        assert!((mean - 4.0).abs() < 4.0 * 4.0 / (20_000f64).sqrt());

        // Γ(3, α) against sums of three exponentials, two-sample KS
        let g = simulate_resolvent(
            &WalkConfig {
                walks: 10_000,
                ..base
            },
            0.25,
            3,
        )
        .unwrap()
        .times;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let e = Exp::new(0.25).unwrap();
        let s: Vec<f64> = (0..10_000)
            .map(|_| (0..3).map(|_| e.sample(&mut rng)).sum())
            .collect();
        let d = ks_statistic(g, s);
        // p > 0.01 ⇔ D < 1.628·√(2/n)
        assert!(d < 1.628 * (2.0 / 10_000f64).sqrt(), "{d}");
    }

    fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn large_alpha_concentrates_at_origin() {
        let cfg = WalkConfig::diffusion(1.0, 0.1, 0.0, 2000, 10, 2).with_gamma(1e6, 1);
        for e in simulate(&cfg).unwrap().endpoints {
            assert!(e.y.norm() < 0.05 && e.n.z > 0.99);
        }
    }

    #[test]
    fn single_endpoint_bin() {
        let s = OrientationSampling::icosahedral(1);
        let bins = SpatialBins::cubic(5, 0.5);
        let e = Endpoint {
            y: Vector3::new(0.1, -0.2, 0.6),
            n: Vector3::z(),
        };
        let h = bin_endpoints(&[e], &bins, &s).unwrap();
        let nz: Vec<(usize, f64)> = match &h.field.data {
            crate::field::FieldValues::Samples { values, .. } => values
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, v)| *v != 0.0)
                .collect(),
            _ => unreachable!(),
        };
        assert_eq!(nz.len(), 1);
        assert!((nz[0].1 - 1.0 / (0.125 * s.weights[0])).abs() < 1e-12);
        assert!((h.field.mass() - 1.0).abs() < 1e-12);
        let v = nz[0].0 % 125;
        assert_eq!(h.field.voxel_coords(v), [2, 2, 3]);
    }

    #[test]
    fn uniform_orientations_give_flat_density() {
        let s = OrientationSampling::icosahedral(1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = 200_000;
        let pts: Vec<Endpoint> = (0..m)
            .map(|_| {
                let v: Vector3<f64> = Vector3::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                );
                Endpoint {
                    y: Vector3::zeros(),
                    n: v.normalize(),
                }
            })
            .collect();
        let h = bin_endpoints(&pts, &SpatialBins::cubic(1, 1.0), &s).unwrap();
        let crate::field::FieldValues::Samples { values, .. } = &h.field.data else {
            unreachable!()
        };
        let want = 1.0 / (4.0 * PI);
        for (k, v) in values.iter().enumerate() {
            let expected = m as f64 * s.weights[k] / (4.0 * PI);
            let band = 3.0 * expected.sqrt() / (m as f64 * s.weights[k]);
            assert!((v - want).abs() < band, "cell {k}: {v} vs {want} ± {band}");
        }
        assert!((h.field.mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn endpoint_dump_round_trip() {
        let b = simulate(&WalkConfig::diffusion(1.0, 0.1, 1.0, 7, 3, 1)).unwrap();
        let mut buf = Vec::new();
        write_endpoints(&b, &mut buf).unwrap();
        assert_eq!(buf.len(), 7 * 48);
        assert_eq!(read_endpoints(&buf).unwrap(), b.endpoints);
        assert!(matches!(
            read_endpoints(&buf[..50]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(simulate(&WalkConfig::diffusion(1.0, 0.1, 1.0, 0, 3, 1)).is_err());
        assert!(simulate(&WalkConfig::diffusion(1.0, 0.1, 1.0, 3, 0, 1)).is_err());
        assert!(
            simulate(&WalkConfig::diffusion(1.0, 0.1, 1.0, 3, 3, 1).with_gamma(0.0, 1)).is_err()
        );
    }
}
