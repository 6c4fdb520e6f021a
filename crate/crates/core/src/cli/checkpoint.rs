//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `VELA0001` |
//! | 4 | format version (u32, currently 1) |
//! | 4 | dimension (u32) |
//! | 4 | points per axis (u32) |
//! | 8 × 4 | box length, time, gamma, mu (f64) |
//! | 1 | mode (0 incompressible, 1 compressible) |
//! | 7 | reserved, zero |
//! | 8 × N(1 + d + d²) | `ρ`, then `u_i`, then `E_ij` row-major, each in grid order |

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::dynamics::Mode;
use crate::grid::{Field, Grid};
use crate::state::State;

pub const MAGIC: &[u8; 8] = b"VELA0001";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 8 + 4 * 3 + 8 * 4 + 1 + 7;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("short read: expected {expected} bytes, found {found}")]
    ShortRead { expected: usize, found: usize },
    #[error("bad magic: not a checkpoint file")]
    BadMagic,
    #[error("version mismatch: file has version {found}, expected {VERSION}")]
    VersionMismatch { found: u32 },
    #[error("dimension mismatch: file is {found}-D, expected {expected}-D")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("corrupt header: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A state with the run parameters stored beside it.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub state: State,
    pub gamma: f64,
    pub mu: f64,
    pub mode: Mode,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let s = &self.state;
        let grid = s.grid();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len() * (1 + grid.dim() + grid.dim().pow(2)));
        out.extend_from_slice(MAGIC);
        for v in [VERSION, grid.dim() as u32, grid.n() as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [grid.length(), s.t, self.gamma, self.mu] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(match self.mode {
            Mode::Incompressible => 0,
            Mode::Compressible => 1,
        });
        out.extend_from_slice(&[0; 7]);
        let comps = s
            .rho
            .components()
            .iter()
            .chain(s.u.components())
            .chain(s.e.components());
        for c in comps {
            for v in c {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Decodes a checkpoint; `expected_dim` rejects files of another
    /// dimension.
    pub fn from_bytes(bytes: &[u8], expected_dim: Option<usize>) -> Result<Self, CheckpointError> {
        if bytes.len() < HEADER_LEN {
            return Err(CheckpointError::ShortRead {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        if &bytes[..8] != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(CheckpointError::VersionMismatch { found: version });
        }
        let dim = u32_at(12) as usize;
        let n = u32_at(16) as usize;
        if let Some(expected) = expected_dim {
            if dim != expected {
                return Err(CheckpointError::DimensionMismatch { expected, found: dim });
            }
        }
        let (length, t, gamma, mu) = (f64_at(20), f64_at(28), f64_at(36), f64_at(44));
        let mode = match bytes[52] {
            0 => Mode::Incompressible,
            1 => Mode::Compressible,
            m => return Err(CheckpointError::Corrupt(format!("unknown mode byte {m}"))),
        };
        let grid = Grid::new(dim, n, length).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let ncomp = 1 + dim + dim * dim;
        let expected = HEADER_LEN + 8 * ncomp * grid.len();
        if bytes.len() < expected {
            return Err(CheckpointError::ShortRead {
                expected,
                found: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(CheckpointError::Corrupt(format!(
                "{} trailing bytes",
                bytes.len() - expected
            )));
        }
        let mut comps: Vec<Vec<f64>> = bytes[HEADER_LEN..]
            .chunks_exact(8 * grid.len())
            .map(|chunk| {
                chunk
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect()
            })
            .collect();
        let e = comps.split_off(1 + dim);
        let u = comps.split_off(1);
        let corrupt = |e: crate::Error| CheckpointError::Corrupt(e.to_string());
        let state = State {
            t,
            rho: Field::from_components(&grid, comps).map_err(corrupt)?,
            u: Field::from_components(&grid, u).map_err(corrupt)?,
            e: Field::from_components(&grid, e).map_err(corrupt)?,
        };
        Ok(Checkpoint { state, gamma, mu, mode })
    }
}

pub fn write_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&ckpt.to_bytes())?;
    f.sync_all()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path, expected_dim: Option<usize>) -> Result<Checkpoint, CheckpointError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    Checkpoint::from_bytes(&bytes, expected_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{random_scalar, random_tensor, random_vector};
    use std::f64::consts::PI;

    fn sample(dim: usize) -> Checkpoint {
        let g = Grid::new(dim, 8, 2.0 * PI).unwrap();
        let state = State {
            t: 0.125,
            rho: random_scalar(&g, 2, 1).map(|v| 1.0 + 0.1 * v),
            u: random_vector(&g, 2, 2),
            e: random_tensor(&g, 2, 3),
        };
        Checkpoint {
            state,
            gamma: 1.4,
            mu: 0.05,
            mode: Mode::Compressible,
        }
    }

    #[test]
    fn bytes_round_trip_bitwise() {
        for dim in [2, 3] {
            let c = sample(dim);
            let bytes = c.to_bytes();
            let back = Checkpoint::from_bytes(&bytes, Some(dim)).unwrap();
            assert!(back.state.bitwise_eq(&c.state));
            assert_eq!(back.state.t.to_bits(), c.state.t.to_bits());
            assert_eq!((back.gamma, back.mu, back.mode), (c.gamma, c.mu, c.mode));
            assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn equilibrium_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eq.ckpt");
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let c = Checkpoint {
            state: State::equilibrium(&g),
            gamma: 2.0,
            mu: 0.1,
            mode: Mode::Incompressible,
        };
        write_checkpoint(&c, &path).unwrap();
        let back = read_checkpoint(&path, None).unwrap();
        assert!(back.state.bitwise_eq(&c.state));
    }

    #[test]
    fn truncation_is_a_short_read() {
        let bytes = sample(2).to_bytes();
        for cut in [0, 10, HEADER_LEN, bytes.len() - 1] {
            let err = Checkpoint::from_bytes(&bytes[..cut], None).unwrap_err();
            assert!(err.to_string().contains("short read"), "{cut}: {err}");
        }
    }

    #[test]
    fn header_checks() {
        let mut bytes = sample(2).to_bytes();
        let err = Checkpoint::from_bytes(&bytes, Some(3)).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"), "{err}");
        bytes[8] = 9;
        let err = Checkpoint::from_bytes(&bytes, None).unwrap_err();
        assert!(err.to_string().contains("version mismatch"), "{err}");
        bytes[0] = b'X';
        let err = Checkpoint::from_bytes(&bytes, None).unwrap_err();
        assert!(err.to_string().contains("bad magic"), "{err}");
    }

    #[test]
    fn header_length_matches_layout() {
        let c = sample(2);
        let g = c.state.grid();
        assert_eq!(HEADER_LEN, 60);
        assert_eq!(&c.to_bytes()[..8], b"VELA0001");
        assert_eq!(c.to_bytes().len(), HEADER_LEN + 8 * g.len() * 7);
    }
}
