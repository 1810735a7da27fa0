//! Flat binary snapshots of `(h, q)`.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size        content
//! 0       8           magic b"MHDSNAP1"
//! 8       8           n, interior points per axis (u64)
//! 16      8           field count, always 6 (u64)
//! 24      8           tau (f64)
//! 32      8           ln_scale (f64); stored values times e^{ln_scale} give the state
//! 40      6·n³·8      h1, h2, h3, q1, q2, q3 as f64, each in (i n + j) n + k order
//! ```

use std::io::{Read, Write};

use super::grid::{FieldPair, Grid, ScalarGridField, VectorGridField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"MHDSNAP1";
pub const FIELD_COUNT: u64 = 6;
pub const HEADER_BYTES: usize = 40;

/// A state at one `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub tau: f64,
    pub ln_scale: f64,
    pub fields: FieldPair,
}

impl Snapshot {
    pub fn new(tau: f64, ln_scale: f64, fields: FieldPair) -> Self {
        Snapshot { tau, ln_scale, fields }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.fields.grid().n as u64;
        w.write_all(MAGIC)?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&FIELD_COUNT.to_le_bytes())?;
        w.write_all(&self.tau.to_le_bytes())?;
        w.write_all(&self.ln_scale.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.fields.grid().len() * 8);
        for c in self.fields.components() {
            buf.clear();
            for v in &c.data {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_BYTES];
        r.read_exact(&mut header).map_err(|e| Error::Format(format!("snapshot header: {e}")))?;
        if &header[0..8] != MAGIC {
            return Err(Error::Format("snapshot magic mismatch".into()));
        }
        let word = |i: usize| <[u8; 8]>::try_from(&header[i..i + 8]).expect("slice of length 8");
        let n = u64::from_le_bytes(word(8));
        let count = u64::from_le_bytes(word(16));
        let tau = f64::from_le_bytes(word(24));
        let ln_scale = f64::from_le_bytes(word(32));
        if count != FIELD_COUNT {
            return Err(Error::Format(format!("expected {FIELD_COUNT} fields, found {count}")));
        }
        let grid = usize::try_from(n)
            .ok()
            .and_then(|n| Grid::new(n).ok())
            .ok_or_else(|| Error::Format(format!("invalid grid size {n}")))?;
        let mut comps = Vec::with_capacity(6);
        let mut bytes = vec![0u8; grid.len() * 8];
        for _ in 0..FIELD_COUNT {
            r.read_exact(&mut bytes).map_err(|e| Error::Format(format!("snapshot data: {e}")))?;
            let data = bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of length 8")))
                .collect();
            comps.push(ScalarGridField { grid, data });
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after snapshot".into()));
        }
        let mut it = comps.into_iter();
        let mut next3 = || VectorGridField::new([(); 3].map(|_| it.next().expect("six components")));
        let h = next3();
        let q = next3();
        Ok(Snapshot { tau, ln_scale, fields: FieldPair::new(h, q) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolver::init::random_divergence_free;

    #[test]
    fn round_trip_and_layout() {
        let g = Grid::new(5).unwrap();
        let s = Snapshot::new(0.25, -3.5, random_divergence_free(g, 2, 2, 1.0));
        let bytes = s.to_bytes();
        assert_eq!(bytes.len(), HEADER_BYTES + 6 * 125 * 8);
        assert_eq!(&bytes[8..16], &5u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &6u64.to_le_bytes());
        let first = f64::from_le_bytes(bytes[40..48].try_into().unwrap());
        assert_eq!(first, s.fields.h.c[0].data[0]);
        assert_eq!(Snapshot::read(&bytes[..]).unwrap(), s);
    }

    #[test]
    fn rejects_corruption() {
        let g = Grid::new(4).unwrap();
        let bytes = Snapshot::new(0.0, 0.0, FieldPair::zeros(g)).to_bytes();
        assert!(Snapshot::read(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Snapshot::read(&bad[..]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(Snapshot::read(&long[..]).is_err());
    }
}
