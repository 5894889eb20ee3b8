use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;

use r3s2::field::{synthesize, FieldValues, R3S2Field};
use r3s2::sh::{icosahedral_mesh, SphereMesh};

/// One glyph: voxel coordinates and its surface vertices.
pub struct Glyph {
    pub voxel: [usize; 3],
    pub vertices: Vec<Vector3<f64>>,
}

pub struct GlyphField {
    pub mesh: SphereMesh,
    pub glyphs: Vec<Glyph>,
    /// Radius per unit field value.
    pub nu: f64,
}

/// Surfaces `y + ν max(U(y,n), 0) n` on every `spacing`-th voxel. `ν` is
/// chosen so the largest glyph radius is half the glyph spacing, times `scale`.
pub fn glyph_field(
    field: &R3S2Field,
    spacing: usize,
    scale: f64,
    refinement: usize,
) -> r3s2::Result<GlyphField> {
    if spacing == 0 || !(scale > 0.0) {
        return Err(r3s2::Error::Parameter(format!(
            "spacing {spacing} and scale {scale} must be positive"
        )));
    }
    let mesh = icosahedral_mesh(refinement);
    let picked: Vec<usize> = (0..field.n_voxels())
        .filter(|&v| field.voxel_coords(v).iter().all(|c| c % spacing == 0))
        .collect();
    let values: Vec<Vec<f64>> = picked
        .par_iter()
        .map(|&v| match &field.data {
            FieldValues::Harmonics { lmax, .. } => {
                synthesize(&field.coefficients_at(v), *lmax, &mesh.vertices)
            }
            FieldValues::Samples { .. } => mesh
                .vertices
                .iter()
                .map(|n| field.value_at_voxel(v, n))
                .collect(),
        })
        .collect();
    let peak = values.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(r3s2::Error::Parameter(
            "field has no positive values to draw".into(),
        ));
    }
    let nu = scale * 0.5 * spacing as f64 * field.voxel_size / peak;
    let glyphs = picked
        .iter()
        .zip(values)
        .map(|(&v, vals)| {
            let y = field.position(v);
            let vertices = mesh
                .vertices
                .iter()
                .zip(vals)
                .map(|(n, u)| y + n * (nu * u.max(0.0)))
                .collect();
            Glyph {
                voxel: field.voxel_coords(v),
                vertices,
            }
        })
        .collect();
    Ok(GlyphField { mesh, glyphs, nu })
}

/// Wavefront OBJ with one group per voxel.
pub fn write_obj<W: Write>(g: &GlyphField, w: &mut W) -> std::io::Result<()> {
    writeln!(
        w,
        "# glyph field: {} glyphs, nu = {:e}",
        g.glyphs.len(),
        g.nu
    )?;
    let nvert = g.mesh.vertices.len();
    for (i, glyph) in g.glyphs.iter().enumerate() {
        let [x, y, z] = glyph.voxel;
        writeln!(w, "g voxel_{x}_{y}_{z}")?;
        for p in &glyph.vertices {
            writeln!(w, "v {:.9e} {:.9e} {:.9e}", p.x, p.y, p.z)?;
        }
        let base = i * nvert + 1;
        for f in &g.mesh.faces {
            writeln!(w, "f {} {} {}", base + f[0], base + f[1], base + f[2])?;
        }
    }
    Ok(())
}
