//! Binary snapshots of the spectral state.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `HMHD` |
//! | 4 | format version, u32 (= 1) |
//! | 4 | lattice dimension, u32 |
//! | 4 | n, u32 |
//! | 4 | component count, u32 |
//! | 8 | time, f64 |
//! | 16 per coefficient | re, im as f64, component by component, row-major lattice order |
//! | 4 | CRC-32 of every preceding byte |

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mhd25d::SimState25D;
use crate::mhd3d::SimState3D;
use crate::spectral::{Grid, VectorField};

pub const MAGIC: &[u8; 4] = b"HMHD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 28;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SnapshotHeader {
    pub version: u32,
    pub dim: u32,
    pub n: u32,
    pub components: u32,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: u32,
    pub n: u32,
    pub time: f64,
    pub components: Vec<Vec<Complex64>>,
}

fn push_fields(out: &mut Vec<Vec<Complex64>>, fields: &[&VectorField]) {
    for f in fields {
        out.extend(f.comps().iter().cloned());
    }
}

impl Snapshot {
    /// u, B and, when evolved, v: six or nine components.
    pub fn from_state_3d(s: &SimState3D) -> Self {
        let g = s.grid();
        let mut comps = Vec::new();
        push_fields(&mut comps, &[&s.u, &s.b]);
        if let Some(v) = &s.v {
            push_fields(&mut comps, &[v]);
        }
        Snapshot { dim: g.dim() as u32, n: g.n() as u32, time: s.t, components: comps }
    }

    pub fn from_state_25d(s: &SimState25D) -> Self {
        let g = s.grid();
        let mut comps = Vec::new();
        push_fields(&mut comps, &[s.u(), s.b()]);
        Snapshot { dim: g.dim() as u32, n: g.n() as u32, time: s.t, components: comps }
    }

    pub fn header(&self) -> SnapshotHeader {
        SnapshotHeader {
            version: VERSION,
            dim: self.dim,
            n: self.n,
            components: self.components.len() as u32,
            time: self.time,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let len: usize = self.components.iter().map(|c| c.len()).sum();
        let mut b = Vec::with_capacity(HEADER_LEN + 16 * len + 4);
        b.extend_from_slice(MAGIC);
        for v in [VERSION, self.dim, self.n, self.components.len() as u32] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&self.time.to_le_bytes());
        for c in &self.components {
            for z in c {
                b.extend_from_slice(&z.re.to_le_bytes());
                b.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&b);
        b.extend_from_slice(&crc.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let h = parse_header(b)?;
        let per = (h.n as usize).checked_pow(h.dim).ok_or_else(|| Error::Format("lattice size overflows".into()))?;
        let body = per
            .checked_mul(h.components as usize)
            .and_then(|x| x.checked_mul(16))
            .ok_or_else(|| Error::Format("payload size overflows".into()))?;
        if b.len() != HEADER_LEN + body + 4 {
            return Err(Error::Format(format!(
                "expected {} bytes for {} components of {} modes, found {}",
                HEADER_LEN + body + 4,
                h.components,
                per,
                b.len()
            )));
        }
        let stored = u32::from_le_bytes(b[b.len() - 4..].try_into().unwrap());
        if crc32fast::hash(&b[..b.len() - 4]) != stored {
            return Err(Error::Format("checksum mismatch".into()));
        }
        let f = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        let components = (0..h.components as usize)
            .map(|c| {
                (0..per)
                    .map(|i| {
                        let o = HEADER_LEN + 16 * (c * per + i);
                        Complex64::new(f(o), f(o + 8))
                    })
                    .collect()
            })
            .collect();
        Ok(Snapshot { dim: h.dim, n: h.n, time: h.time, components })
    }

    fn fields(&self, grid: &Arc<Grid>) -> Result<Vec<VectorField>> {
        if grid.dim() as u32 != self.dim || grid.n() as u32 != self.n {
            return Err(Error::Format(format!(
                "snapshot lattice {}^{} does not match the requested {}^{}",
                self.n,
                self.dim,
                grid.n(),
                grid.dim()
            )));
        }
        if self.components.len() % 3 != 0 {
            return Err(Error::Format(format!("{} components do not form vector fields", self.components.len())));
        }
        self.components
            .chunks(3)
            .map(|c| VectorField::from_coeffs(grid, [c[0].clone(), c[1].clone(), c[2].clone()], false))
            .collect()
    }

    /// Rebuilds a 3D state on `grid`; any other lattice is rejected.
    pub fn to_state_3d(&self, grid: &Arc<Grid>) -> Result<SimState3D> {
        let mut f = self.fields(grid)?.into_iter();
        let (u, b) = match (f.next(), f.next()) {
            (Some(u), Some(b)) => (u, b),
            _ => return Err(Error::Format("snapshot lacks u and B".into())),
        };
        let v = f.next();
        if f.next().is_some() {
            return Err(Error::Format("too many components for a 3D state".into()));
        }
        Ok(SimState3D { t: self.time, u, b, v })
    }

    pub fn to_state_25d(&self, grid: &Arc<Grid>, eps: f64) -> Result<SimState25D> {
        let f = self.fields(grid)?;
        if f.len() != 2 {
            return Err(Error::Format(format!("a 2½D snapshot holds 6 components, found {}", 3 * f.len())));
        }
        let mut it = f.into_iter();
        let mut s = SimState25D::new(it.next().unwrap(), it.next().unwrap(), eps)?;
        s.t = self.time;
        Ok(s)
    }
}

fn parse_header(b: &[u8]) -> Result<SnapshotHeader> {
    if b.len() < HEADER_LEN + 4 {
        return Err(Error::Format(format!("{} bytes is too short for a snapshot", b.len())));
    }
    if &b[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
    let h = SnapshotHeader {
        version: u(4),
        dim: u(8),
        n: u(12),
        components: u(16),
        time: f64::from_le_bytes(b[20..28].try_into().unwrap()),
    };
    if h.version != VERSION {
        return Err(Error::Format(format!("unsupported version {}", h.version)));
    }
    if !(h.dim == 2 || h.dim == 3) || h.n < 2 || h.components == 0 {
        return Err(Error::Format(format!("implausible header {h:?}")));
    }
    Ok(h)
}

pub fn snapshot_write(path: &Path, snap: &Snapshot) -> Result<()> {
    std::fs::write(path, snap.to_bytes())?;
    Ok(())
}

pub fn snapshot_read(path: &Path) -> Result<Snapshot> {
    Snapshot::from_bytes(&std::fs::read(path)?)
}

/// Header of a snapshot file, checked against the checksum.
pub fn snapshot_header(path: &Path) -> Result<SnapshotHeader> {
    Ok(snapshot_read(path)?.header())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhd3d::{make_initial, InitialKind};

    fn sample() -> (Arc<Grid>, SimState3D) {
        let g = Grid::shared(3, 8).unwrap();
        let (u, b) = make_initial(&g, InitialKind::RandomBand { lo: 1.0, hi: 2.0, seed: 1 }, 0.5).unwrap();
        let mut s = SimState3D::extended(u, b, 1.0).unwrap();
        s.t = 0.125;
        (g, s)
    }

    #[test]
    fn bit_exact_round_trip() {
        let (g, s) = sample();
        let snap = Snapshot::from_state_3d(&s);
        let back = Snapshot::from_bytes(&snap.to_bytes()).unwrap();
        assert_eq!(back, snap);
        let r = back.to_state_3d(&g).unwrap();
        assert_eq!(r.t, s.t);
        for (a, b) in [(&r.u, &s.u), (&r.b, &s.b), (r.v.as_ref().unwrap(), s.v.as_ref().unwrap())] {
            for c in 0..3 {
                assert!(a.comp(c).iter().zip(b.comp(c)).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
            }
        }
        assert_eq!(snap.header().components, 9);
    }

    #[test]
    fn corruption_is_detected() {
        let (_, s) = sample();
        let bytes = Snapshot::from_state_3d(&s).to_bytes();
        for pos in [0, 5, 40, bytes.len() / 2, bytes.len() - 1] {
            let mut b = bytes.clone();
            b[pos] ^= 0x10;
            assert!(matches!(Snapshot::from_bytes(&b), Err(Error::Format(_))), "byte {pos}");
        }
        assert!(matches!(Snapshot::from_bytes(&bytes[..bytes.len() - 3]), Err(Error::Format(_))));
    }

    #[test]
    fn other_resolution_is_rejected() {
        let (_, s) = sample();
        let snap = Snapshot::from_state_3d(&s);
        let g16 = Grid::shared(3, 16).unwrap();
        assert!(matches!(snap.to_state_3d(&g16), Err(Error::Format(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.hmhd");
        let (_, s) = sample();
        let snap = Snapshot::from_state_3d(&s);
        snapshot_write(&p, &snap).unwrap();
        assert_eq!(snapshot_read(&p).unwrap(), snap);
        let h = snapshot_header(&p).unwrap();
        assert_eq!((h.dim, h.n, h.components, h.time), (3, 8, 9, 0.125));
    }
}
