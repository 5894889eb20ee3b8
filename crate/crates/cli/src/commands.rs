use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Parser;
use nalgebra::Vector3;
use rayon::prelude::*;
use serde_json::{json, Value};

use r3s2::approx::{log_approx_kernel, ApproxParams};
use r3s2::convolve::shift_twist_convolve;
use r3s2::evolution::{Horizon, ProcessParams, Route};
use r3s2::field::{load_field, write_field, FieldStats, FieldValues, R3S2Field};
use r3s2::montecarlo::{
    bin, simulate, write_endpoints, AngularStep, CompletionStep, SpatialBins, WalkConfig,
};
use r3s2::sh::OrientationSampling;
use r3s2::spectral::{detect_branch_points, eigenvalue_curves, write_curves_csv, CurveOperator};
use r3s2::synthesis::{
    frequency_kernel, inverse_spatial_fft, make_grid, verify_symmetries, SymmetryCheck,
};

use crate::args::*;
use crate::glyph::{glyph_field, write_obj};
use crate::manifest::{RunManifest, Timer};
use crate::output::{atomic_write, sibling};
use crate::UsageError;

pub fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<()> {
    match cli.command {
        Command::Kernel(a) => kernel(&a, &argv),
        Command::Montecarlo(a) => montecarlo(&a, &argv),
        Command::Enhance(a) => enhance(&a, &argv),
        Command::Glyphs(a) => glyphs(&a, &argv),
        Command::Eigencurves(a) => eigencurves(&a, &argv),
        Command::Header(a) => header(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn process_params(f: &ProcessFlags) -> anyhow::Result<(ProcessParams, Horizon)> {
    let t = match (f.t, f.alpha) {
        (Some(t), None) => t,
        (None, Some(_)) => 0.0,
        _ => return Err(UsageError("give exactly one of --t and --alpha".into()).into()),
    };
    let mut p = match f.process {
        ProcessArg::Diffusion => ProcessParams::diffusion(f.d33, f.d44, t),
        ProcessArg::Completion => ProcessParams::completion(f.d44, t),
        ProcessArg::Elliptic => {
            let d11 = f
                .d11
                .ok_or_else(|| UsageError("the elliptic process needs --d11".into()))?;
            ProcessParams::elliptic(f.d33, d11, f.d44, t)
        }
    };
    let horizon = match f.alpha {
        Some(alpha) => {
            p = p.with_alpha(alpha, f.gamma_k);
            p.validate_resolvent()?;
            Horizon::Gamma {
                alpha,
                k: f.gamma_k,
            }
        }
        None => {
            p.validate_time()?;
            Horizon::Time(t)
        }
    };
    Ok((p, horizon))
}

fn save(field: &R3S2Field, path: &Path) -> anyhow::Result<()> {
    atomic_write(path, |w| Ok(write_field(field, w)?))
}

fn stats_json(s: &FieldStats, field: &R3S2Field, sampling: &OrientationSampling) -> Value {
    let (v, o) = s.argmax;
    let n = sampling.directions[o];
    json!({
        "mass": s.mass,
        "min": s.min,
        "max": s.max,
        "argmax_voxel": field.voxel_coords(v),
        "argmax_is_center": v == field.center_voxel(),
        "argmax_direction": [n.x, n.y, n.z],
        "first_moment": s.first_moment,
    })
}

fn summary_sampling(field: &R3S2Field) -> OrientationSampling {
    field
        .sampling()
        .cloned()
        .unwrap_or_else(|| OrientationSampling::icosahedral(2))
}

fn kernel(a: &KernelArgs, argv: &[String]) -> anyhow::Result<()> {
    let mut timer = Timer::new();
    let (p, horizon) = process_params(&a.process)?;
    let grid = make_grid(a.grid_n, a.grid_eta)?;
    let mut field = match a.backend {
        BackendArg::Exact => {
            let route = match a.route {
                RouteArg::Default => Route::Default,
                RouteArg::Eigen => Route::Eigen,
                RouteArg::Direct => Route::Direct,
            };
            eprintln!("kernel: {} frequencies, lmax {}", grid.n_points(), a.lmax);
            let freq = frequency_kernel(&grid, &p, a.lmax, horizon, route)?;
            timer.lap("frequency");
            let f = inverse_spatial_fft(freq)?;
            timer.lap("fft");
            f
        }
        BackendArg::Approx => {
            let (ProcessArg::Diffusion, Some(t)) = (a.process.process, a.process.t) else {
                return Err(UsageError(
                    "the approximation backend covers fixed-time diffusion only".into(),
                )
                .into());
            };
            let ap = ApproxParams {
                xi: a.xi,
                time_scale: a.time_scale,
                ..ApproxParams::new(a.process.d33, a.process.d44, t)
            };
            ap.validate()?;
            let f = approx_field(
                &ap,
                grid.size(),
                grid.voxel_size(),
                &OrientationSampling::icosahedral(a.sampling.unwrap_or(3)),
            )?;
            timer.lap("evaluate");
            f
        }
    };
    let mut summary = serde_json::Map::new();
    if a.verify {
        let check = SymmetryCheck {
            inversion: a.process.process != ProcessArg::Completion,
            stride: grid.size().div_ceil(33),
            ..SymmetryCheck::default()
        };
        let rep = verify_symmetries(&field, &check)?;
        // quarter turns map voxels onto voxels, so no interpolation error enters
        let quarter = SymmetryCheck {
            angles: vec![PI / 2.0, PI, 1.5 * PI],
            inversion: false,
            ..check.clone()
        };
        let grid_rep = verify_symmetries(&field, &quarter)?;
        summary.insert(
            "symmetry".into(),
            json!({
                "rotation": rep.rotation,
                "grid_rotation": grid_rep.rotation,
                "inversion": rep.inversion,
                "points": rep.points,
            }),
        );
        timer.lap("verify");
    }
    if let (Some(r), FieldValues::Harmonics { .. }) = (a.sampling, &field.data) {
        field = field.to_samples(&OrientationSampling::icosahedral(r))?;
    }
    let sampling = summary_sampling(&field);
    let stats = field.stats(&sampling);
    summary.insert("stats".into(), stats_json(&stats, &field, &sampling));
    summary.insert("dims".into(), json!(field.dims));
    summary.insert("voxel_size".into(), json!(field.voxel_size));
    timer.lap("summary");
    save(&field, &a.out)?;
    timer.lap("write");
    finish(
        "kernel",
        argv,
        a,
        None,
        vec![a.out.clone()],
        timer,
        Value::Object(summary),
        &a.out,
    )
}

fn approx_field(
    ap: &ApproxParams,
    size: usize,
    h: f64,
    sampling: &OrientationSampling,
) -> anyhow::Result<R3S2Field> {
    let mut field = R3S2Field::zeros_samples([size; 3], h, sampling.clone());
    let nv = field.n_voxels();
    let positions: Vec<Vector3<f64>> = (0..nv).map(|v| field.position(v)).collect();
    if let FieldValues::Samples { values, .. } = &mut field.data {
        values
            .par_chunks_mut(nv)
            .zip(&sampling.directions)
            .try_for_each(|(slab, n)| -> r3s2::Result<()> {
                for (x, y) in slab.iter_mut().zip(&positions) {
                    *x = log_approx_kernel(y, n, ap)?;
                }
                Ok(())
            })?;
    }
    Ok(field)
}

fn montecarlo(a: &MonteCarloArgs, argv: &[String]) -> anyhow::Result<()> {
    let mut timer = Timer::new();
    let f = &a.process;
    let mut cfg = match f.process {
        ProcessArg::Diffusion => WalkConfig::diffusion(f.d33, f.d44, 0.0, a.walks, a.steps, a.seed),
        ProcessArg::Completion => WalkConfig::completion(f.d44, 0.0, a.walks, a.steps, a.seed),
        ProcessArg::Elliptic => {
            return Err(
                UsageError("random walks cover diffusion and completion only".into()).into(),
            )
        }
    };
    cfg = match (f.t, f.alpha) {
        (Some(t), None) => WalkConfig {
            travel: r3s2::montecarlo::TravelTime::Fixed(t),
            ..cfg
        },
        (None, Some(alpha)) => cfg.with_gamma(alpha, f.gamma_k),
        _ => return Err(UsageError("give exactly one of --t and --alpha".into()).into()),
    };
    cfg.angular_step = match a.angular_step {
        AngularStepArg::Generator => AngularStep::Generator,
        AngularStepArg::Halved => AngularStep::Halved,
    };
    cfg.completion_step = match a.completion_step {
        CompletionStepArg::Linear => CompletionStep::Linear,
        CompletionStepArg::SquareRoot => CompletionStep::SquareRoot,
    };
    cfg.validate()?;
    if !(a.voxel_size > 0.0) || a.bins == 0 {
        return Err(UsageError("--bins and --voxel-size must be positive".into()).into());
    }
    let batch = simulate(&cfg)?;
    timer.lap("simulate");
    let hist = bin(
        &batch,
        &SpatialBins::cubic(a.bins, a.voxel_size),
        a.sphere_refinement,
    )?;
    timer.lap("bin");
    let endpoints = sibling(&a.out, ".endpoints");
    save(&hist.field, &a.out)?;
    atomic_write(&endpoints, |w| Ok(write_endpoints(&batch, w)?))?;
    timer.lap("write");
    let m = batch.endpoints.len() as f64;
    let mean_y = batch
        .endpoints
        .iter()
        .fold(Vector3::zeros(), |s, e| s + e.y)
        / m;
    let mean_nz = batch.endpoints.iter().map(|e| e.n.z).sum::<f64>() / m;
    let sampling = summary_sampling(&hist.field);
    let stats = hist.field.stats(&sampling);
    let summary = json!({
        "inside": hist.inside,
        "outside": hist.outside,
        "mean_endpoint": [mean_y.x, mean_y.y, mean_y.z],
        "mean_n_z": mean_nz,
        "stats": stats_json(&stats, &hist.field, &sampling),
    });
    finish(
        "montecarlo",
        argv,
        a,
        Some(a.seed),
        vec![a.out.clone(), endpoints],
        timer,
        summary,
        &a.out,
    )
}

fn enhance(a: &EnhanceArgs, argv: &[String]) -> anyhow::Result<()> {
    let mut timer = Timer::new();
    let kernel =
        load_field(&a.kernel).with_context(|| format!("reading kernel {}", a.kernel.display()))?;
    let input =
        load_field(&a.input).with_context(|| format!("reading input {}", a.input.display()))?;
    timer.lap("read");
    let out = shift_twist_convolve(&kernel, &input)?;
    timer.lap("convolve");
    save(&out, &a.out)?;
    timer.lap("write");
    let summary = json!({ "input_mass": input.mass(), "output_mass": out.mass(), "kernel_mass": kernel.mass() });
    finish(
        "enhance",
        argv,
        a,
        None,
        vec![a.out.clone()],
        timer,
        summary,
        &a.out,
    )
}

fn glyphs(a: &GlyphArgs, argv: &[String]) -> anyhow::Result<()> {
    let mut timer = Timer::new();
    let field = load_field(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let g = glyph_field(&field, a.spacing, a.scale, a.refinement)?;
    timer.lap("glyphs");
    atomic_write(&a.out, |w| Ok(write_obj(&g, w)?))?;
    timer.lap("write");
    let summary = json!({
        "glyphs": g.glyphs.len(),
        "vertices_per_glyph": g.mesh.vertices.len(),
        "faces_per_glyph": g.mesh.faces.len(),
        "nu": g.nu,
    });
    finish(
        "glyphs",
        argv,
        a,
        None,
        vec![a.out.clone()],
        timer,
        summary,
        &a.out,
    )
}

fn eigencurves(a: &CurveArgs, argv: &[String]) -> anyhow::Result<()> {
    let mut timer = Timer::new();
    let m = a.m as i64;
    if !(a.rho_max >= 0.0) || a.n_rho == 0 || a.n_curves == 0 {
        return Err(UsageError(
            "--rho-max must be non-negative, --n-rho and --n-curves positive".into(),
        )
        .into());
    }
    let op = match a.operator {
        OperatorArg::Swe => CurveOperator::Swe,
        OperatorArg::Gswe => CurveOperator::Gswe,
    };
    let curves = eigenvalue_curves(op, m, a.rho_max, a.n_rho, a.n_curves)?;
    timer.lap("curves");
    let branches = if op == CurveOperator::Gswe && a.rho_max > (m + 1) as f64 {
        detect_branch_points(m, a.rho_max, a.resolution)?.points
    } else {
        Vec::new()
    };
    timer.lap("branches");
    let branch_path = sibling(&a.out, ".branch.csv");
    atomic_write(&a.out, |w| Ok(write_curves_csv(w, &curves)?))?;
    atomic_write(&branch_path, |w| {
        writeln!(w, "m,rho")?;
        for r in &branches {
            writeln!(w, "{m},{r:.12e}")?;
        }
        Ok(())
    })?;
    timer.lap("write");
    let summary = json!({ "rows": curves.len(), "branch_points": branches });
    finish(
        "eigencurves",
        argv,
        a,
        None,
        vec![a.out.clone(), branch_path],
        timer,
        summary,
        &a.out,
    )
}

fn header(a: &HeaderArgs) -> anyhow::Result<()> {
    let f = load_field(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let (storage, lmax) = match &f.data {
        FieldValues::Samples { .. } => ("samples", None),
        FieldValues::Harmonics { lmax, .. } => ("harmonics", Some(*lmax)),
    };
    let h = json!({
        "version": r3s2::field::FORMAT_VERSION,
        "dims": f.dims,
        "voxel_size": f.voxel_size,
        "storage": storage,
        "n_orient": f.n_orient(),
        "lmax": lmax,
    });
    println!("{}", serde_json::to_string_pretty(&h)?);
    Ok(())
}

fn replay(a: &ReplayArgs) -> anyhow::Result<()> {
    let m = RunManifest::load(&a.manifest)
        .with_context(|| format!("reading {}", a.manifest.display()))?;
    let mut full = vec!["kernels".to_string()];
    full.extend(m.argv.iter().cloned());
    let cli = Cli::try_parse_from(&full)?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(UsageError("a manifest cannot record a replay".into()).into());
    }
    run(cli, m.argv)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    name: &str,
    argv: &[String],
    params: impl serde::Serialize,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
    timer: Timer,
    summary: Value,
    out: &Path,
) -> anyhow::Result<()> {
    let mut m = RunManifest::new(name, argv, params, seed)?;
    m.outputs = outputs;
    m.timings = timer.phases;
    m.summary = summary;
    m.save(out)
}
