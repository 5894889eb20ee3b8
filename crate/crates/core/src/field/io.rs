//! `.r3s2` container.
//!
//! Little-endian layout: `"R3S2"`, u32 version, u32 nx, ny, nz, f64 voxel
//! size, u32 n_orient, u8 storage (0 samples, 1 SH coefficients followed by
//! u32 lmax), then for samples the `3 × f64` direction table, then the payload
//! (f64, or interleaved re/im f64 for coefficients) in field index order.
//!
//! Sample weights are not stored. On load they are taken from the matching
//! icosahedral sampling when the table is one, else set to `4π / n`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::{FieldValues, R3S2Field};
use crate::error::{Error, Result};
use crate::sh::{n_coeffs, OrientationSampling};

pub const MAGIC: &[u8; 4] = b"R3S2";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_field<W: Write>(field: &R3S2Field, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for d in field.dims {
        w.write_all(&to_u32(d, "grid dimension")?.to_le_bytes())?;
    }
    w.write_all(&field.voxel_size.to_le_bytes())?;
    w.write_all(&to_u32(field.n_orient(), "orientation count")?.to_le_bytes())?;
    match &field.data {
        FieldValues::Samples { sampling, values } => {
            w.write_all(&[0u8])?;
            for d in &sampling.directions {
                for c in d.iter() {
                    w.write_all(&c.to_le_bytes())?;
                }
            }
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        FieldValues::Harmonics { lmax, values } => {
            w.write_all(&[1u8])?;
            w.write_all(&to_u32(*lmax, "lmax")?.to_le_bytes())?;
            for v in values {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Shape(format!("{what} {v} does not fit the file format")))
}

/// Writes to a temporary sibling and renames it into place.
pub fn save_field(field: &R3S2Field, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = tmp_sibling(path);
    let res = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_field(field, &mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res
}

pub(crate) fn tmp_sibling(path: &Path) -> std::path::PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp{}", std::process::id()))
}

struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        let mut got = 0;
        while got < N {
            match self.inner.read(&mut buf[got..]) {
                Ok(0) => {
                    return Err(Error::Truncated {
                        offset: self.offset,
                        needed: N as u64,
                        available: got as u64,
                    })
                }
                Ok(k) => got += k,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += N as u64;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

struct Header {
    dims: [usize; 3],
    voxel_size: f64,
    n_orient: usize,
    lmax: Option<usize>,
    header_len: u64,
}

impl Header {
    fn payload_len(&self) -> u64 {
        let nv = self.dims.iter().map(|&d| d as u64).product::<u64>();
        let n = nv * self.n_orient as u64;
        match self.lmax {
            None => 24 * self.n_orient as u64 + 8 * n,
            Some(_) => 16 * n,
        }
    }
}

fn read_header<R: Read>(c: &mut Cursor<R>) -> Result<Header> {
    let magic: [u8; 4] = c.bytes()?;
    if &magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {magic:?}, expected \"R3S2\""),
        });
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Version(version));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let off = c.offset;
        *d = c.u32()? as usize;
        if *d == 0 {
            return Err(Error::Format {
                offset: off,
                message: "zero grid dimension".into(),
            });
        }
    }
    let off = c.offset;
    let voxel_size = c.f64()?;
    if !(voxel_size > 0.0 && voxel_size.is_finite()) {
        return Err(Error::Format {
            offset: off,
            message: format!("voxel size {voxel_size} must be positive"),
        });
    }
    let off = c.offset;
    let n_orient = c.u32()? as usize;
    if n_orient == 0 {
        return Err(Error::Format {
            offset: off,
            message: "no orientations".into(),
        });
    }
    let off = c.offset;
    let [storage] = c.bytes::<1>()?;
    let lmax = match storage {
        0 => None,
        1 => {
            let loff = c.offset;
            let l = c.u32()? as usize;
            if n_coeffs(l) != n_orient {
                return Err(Error::Format {
                    offset: loff,
                    message: format!(
                        "lmax {l} needs {} coefficients, header says {n_orient}",
                        n_coeffs(l)
                    ),
                });
            }
            Some(l)
        }
        s => {
            return Err(Error::Format {
                offset: off,
                message: format!("unknown storage kind {s}"),
            })
        }
    };
    Ok(Header {
        dims,
        voxel_size,
        n_orient,
        lmax,
        header_len: c.offset,
    })
}

fn read_body<R: Read>(c: &mut Cursor<R>, h: &Header) -> Result<R3S2Field> {
    let n = h.dims.iter().product::<usize>() * h.n_orient;
    match h.lmax {
        None => {
            let mut dirs = Vec::with_capacity(h.n_orient);
            for _ in 0..h.n_orient {
                let off = c.offset;
                let d = Vector3::new(c.f64()?, c.f64()?, c.f64()?);
                if (d.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::Format {
                        offset: off,
                        message: format!("orientation {d:?} is not a unit vector"),
                    });
                }
                dirs.push(d);
            }
            let sampling = recover_weights(dirs)?;
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                values.push(c.f64()?);
            }
            R3S2Field::from_samples(h.dims, h.voxel_size, sampling, values)
        }
        Some(lmax) => {
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let re = c.f64()?;
                values.push(Complex64::new(re, c.f64()?));
            }
            R3S2Field::from_harmonics(h.dims, h.voxel_size, lmax, values)
        }
    }
}

fn recover_weights(dirs: Vec<Vector3<f64>>) -> Result<OrientationSampling> {
    let n = dirs.len();
    let mut level = 0usize;
    while 10 * 4usize.pow(level as u32) + 2 < n && level < 8 {
        level += 1;
    }
    if 10 * 4usize.pow(level as u32) + 2 == n {
        let ico = OrientationSampling::icosahedral(level);
        if ico
            .directions
            .iter()
            .zip(&dirs)
            .all(|(a, b)| (a - b).norm() < 1e-12)
        {
            return Ok(ico);
        }
    }
    OrientationSampling::new(dirs, vec![4.0 * std::f64::consts::PI / n as f64; n])
}

pub fn read_field<R: Read>(r: R) -> Result<R3S2Field> {
    let mut c = Cursor {
        inner: r,
        offset: 0,
    };
    let h = read_header(&mut c)?;
    read_body(&mut c, &h)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<R3S2Field> {
    let file = File::open(path.as_ref())?;
    let len = file.metadata()?.len();
    let mut c = Cursor {
        inner: BufReader::new(file),
        offset: 0,
    };
    let h = read_header(&mut c)?;
    let want = h.header_len + h.payload_len();
    if len < want {
        return Err(Error::Truncated {
            offset: len,
            needed: want - len,
            available: len,
        });
    }
    if len > want {
        return Err(Error::Format {
            offset: want,
            message: format!("{} trailing bytes", len - want),
        });
    }
    read_body(&mut c, &h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> R3S2Field {
        let s = OrientationSampling::icosahedral(1);
        let n = 2 * 3 * 4 * s.len();
        let v = (0..n)
            .map(|i| (i as f64 * 0.37).sin() * 1e-3 + f64::EPSILON * i as f64)
            .collect();
        R3S2Field::from_samples([2, 3, 4], 0.25, s, v).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.r3s2");
        let f = sample_field();
        save_field(&f, &p).unwrap();
        let g = load_field(&p).unwrap();
        assert_eq!(f, g);

        let h = R3S2Field::from_harmonics(
            [1, 2, 1],
            0.5,
            1,
            (0..8)
                .map(|i| Complex64::new(i as f64, -0.1 * i as f64))
                .collect(),
        )
        .unwrap();
        save_field(&h, &p).unwrap();
        assert_eq!(load_field(&p).unwrap(), h);
    }

    #[test]
    fn truncated_names_missing_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.r3s2");
        save_field(&sample_field(), &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 20]).unwrap();
        match load_field(&p) {
            Err(Error::Truncated { needed, .. }) => assert_eq!(needed, 20),
            other => panic!("{other:?}"),
        }
        match read_field(&bytes[..10]) {
            Err(Error::Truncated { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn version_and_magic_checked() {
        let mut buf = Vec::new();
        write_field(&sample_field(), &mut buf).unwrap();
        let mut v2 = buf.clone();
        v2[4] = 2;
        assert!(matches!(read_field(&v2[..]), Err(Error::Version(2))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_field(&bad[..]),
            Err(Error::Format { offset: 0, .. })
        ));
        let mut storage = buf;
        storage[32] = 7;
        assert!(matches!(
            read_field(&storage[..]),
            Err(Error::Format { offset: 32, .. })
        ));
    }
}
