//! Binary polynomial container.
//!
//! Fixed-width little-endian layout with an explicit magic and version so
//! multi-gigabyte files stream sequentially:
//!
//! ```text
//! magic  b"CHRB"
//! version u32 = 1
//! kind    u8   0 = full tensor, 1 = reduced hierarchy, 2 = split tensor
//! n       u8   number of dimensions
//! per dimension j = 1..n:
//!     degree   u32  N_j
//!     retained u32  M_j            (kind 1 only; M_n = N_n)
//!     min, max f64  domain bounds
//! payload, row-major f64:
//!     kind 0: one coefficient tensor of prod(N_j + 1) values
//!     kind 1: level arrays A^1 .. A^{n-1}, then the terminal array
//!     kind 2: axis u8, then N_axis + 1 slice tensors over the other axes
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use chebrb_core::interpolant::{Domain, Interpolant};
use chebrb_core::reduced_basis::ReducedPolynomial;
use chebrb_core::tensor::NdArray;

const MAGIC: &[u8; 4] = b"CHRB";
const VERSION: u32 = 1;

/// A parsed polynomial container.
#[derive(Debug, Clone, PartialEq)]
pub enum Poly {
    Full(Interpolant),
    Reduced(ReducedPolynomial),
    Split(Interpolant),
}

impl Poly {
    pub fn kind(&self) -> u8 {
        match self {
            Poly::Full(_) => 0,
            Poly::Reduced(_) => 1,
            Poly::Split(_) => 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Poly::Full(p) | Poly::Split(p) => p.dim(),
            Poly::Reduced(q) => q.dim(),
        }
    }

    pub fn domain(&self) -> &Domain {
        match self {
            Poly::Full(p) | Poly::Split(p) => p.domain(),
            Poly::Reduced(q) => q.domain(),
        }
    }

    pub fn degrees(&self) -> &[usize] {
        match self {
            Poly::Full(p) | Poly::Split(p) => p.degrees(),
            Poly::Reduced(q) => q.degrees(),
        }
    }
}

fn write_tensor(w: &mut impl Write, t: &NdArray) -> Result<()> {
    for &v in t.data() {
        w.write_u64::<LittleEndian>(v.to_bits())?;
    }
    Ok(())
}

fn read_tensor(r: &mut impl Read, extents: Vec<usize>) -> Result<NdArray> {
    let len: usize = extents.iter().product();
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        data.push(f64::from_bits(r.read_u64::<LittleEndian>()?));
    }
    Ok(NdArray::new(extents, data)?)
}

pub fn write_poly_to(w: &mut impl Write, poly: &Poly) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u8(poly.kind())?;
    let n = poly.dim();
    if n > u8::MAX as usize {
        bail!("too many dimensions for the container: {n}");
    }
    w.write_u8(n as u8)?;
    let bounds = poly.domain().bounds();
    match poly {
        Poly::Full(p) => {
            for (d, &(lo, hi)) in bounds.iter().enumerate() {
                w.write_u32::<LittleEndian>(p.degrees()[d] as u32)?;
                w.write_u64::<LittleEndian>(lo.to_bits())?;
                w.write_u64::<LittleEndian>(hi.to_bits())?;
            }
            write_tensor(w, p.coeffs().expect("full interpolant"))?;
        }
        Poly::Reduced(q) => {
            for (d, &(lo, hi)) in bounds.iter().enumerate() {
                w.write_u32::<LittleEndian>(q.degrees()[d] as u32)?;
                w.write_u32::<LittleEndian>(q.retained()[d] as u32)?;
                w.write_u64::<LittleEndian>(lo.to_bits())?;
                w.write_u64::<LittleEndian>(hi.to_bits())?;
            }
            for level in q.levels() {
                write_tensor(w, level)?;
            }
            write_tensor(w, q.terminal())?;
        }
        Poly::Split(p) => {
            for (d, &(lo, hi)) in bounds.iter().enumerate() {
                w.write_u32::<LittleEndian>(p.degrees()[d] as u32)?;
                w.write_u64::<LittleEndian>(lo.to_bits())?;
                w.write_u64::<LittleEndian>(hi.to_bits())?;
            }
            let (axis, slices) = p.split_parts().expect("split interpolant");
            w.write_u8(axis as u8)?;
            for s in slices {
                write_tensor(w, s)?;
            }
        }
    }
    Ok(())
}

pub fn read_poly_from(r: &mut impl Read) -> Result<Poly> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).context("reading magic")?;
    if &magic != MAGIC {
        bail!("not a polynomial container (bad magic {magic:?})");
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        bail!("unsupported container version {version}");
    }
    let kind = r.read_u8()?;
    let n = r.read_u8()? as usize;
    if n == 0 {
        bail!("container declares zero dimensions");
    }
    let mut degrees = Vec::with_capacity(n);
    let mut retained = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    for d in 0..n {
        let deg = r.read_u32::<LittleEndian>()? as usize;
        if deg == 0 || deg > 1 << 20 {
            bail!("dimension {d}: implausible degree {deg}");
        }
        degrees.push(deg);
        if kind == 1 {
            retained.push(r.read_u32::<LittleEndian>()? as usize);
        }
        let lo = f64::from_bits(r.read_u64::<LittleEndian>()?);
        let hi = f64::from_bits(r.read_u64::<LittleEndian>()?);
        bounds.push((lo, hi));
    }
    let domain = Domain::new(bounds)?;
    let poly = match kind {
        0 => {
            let extents: Vec<usize> = degrees.iter().map(|&d| d + 1).collect();
            let coeffs = read_tensor(r, extents).context("reading coefficient tensor")?;
            Poly::Full(Interpolant::from_coeffs(domain, coeffs)?)
        }
        1 => {
            let mut levels = Vec::with_capacity(n - 1);
            for j in 0..n - 1 {
                let mut extents: Vec<usize> = retained[..=j].iter().map(|&m| m + 1).collect();
                extents.push(degrees[j] + 1);
                levels.push(read_tensor(r, extents).context("reading level array")?);
            }
            let mut extents: Vec<usize> = retained[..n - 1].iter().map(|&m| m + 1).collect();
            extents.push(degrees[n - 1] + 1);
            let terminal = read_tensor(r, extents).context("reading terminal array")?;
            Poly::Reduced(ReducedPolynomial::from_parts(
                domain, degrees, retained, levels, terminal,
            )?)
        }
        2 => {
            let axis = r.read_u8()? as usize;
            if axis >= n {
                bail!("split axis {axis} out of range for {n} dimensions");
            }
            let slice_extents: Vec<usize> = degrees
                .iter()
                .enumerate()
                .filter(|&(d, _)| d != axis)
                .map(|(_, &deg)| deg + 1)
                .collect();
            let mut slices = Vec::with_capacity(degrees[axis] + 1);
            for _ in 0..=degrees[axis] {
                slices.push(read_tensor(r, slice_extents.clone()).context("reading slice")?);
            }
            Poly::Split(Interpolant::from_split_parts(
                domain, degrees, axis, slices,
            )?)
        }
        other => bail!("unknown container kind {other}"),
    };
    // no trailing garbage
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        bail!("trailing bytes after payload");
    }
    Ok(poly)
}

pub fn write_poly(path: &Path, poly: &Poly) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_poly_to(&mut w, poly)?;
    w.flush()?;
    Ok(())
}

pub fn read_poly(path: &Path) -> Result<Poly> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_poly_from(&mut BufReader::new(file))
}
