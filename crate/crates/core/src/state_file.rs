//! Checkpoint format: a JSON header, raw little-endian coefficient payload,
//! and a trailing SHA-256 of everything before it. Round trips are bit-exact
//! so a resumed run can retrace the original arithmetic.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{ModelKind, ParticleState};
use crate::picard::{Cadence, PicardParams, SystemState};
use crate::propagator::EMState;
use crate::spectral::{Grid, SpectralField3};

const MAGIC: &[u8; 8] = b"MXNWT\x00\x01\x00";

/// Everything needed to restart a run, minus the field payload.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CheckpointHeader {
    pub l: f64,
    pub n: usize,
    pub sigma: f64,
    pub e: f64,
    pub model: ModelKind,
    pub particle: ParticleState,
    pub t: f64,
    pub params: PicardParams,
    pub cadence: Option<Cadence>,
}

pub fn save_checkpoint(path: &Path, header: &CheckpointHeader, em: &EMState) -> Result<()> {
    let header_json = serde_json::to_vec(header)?;
    let mut buf = Vec::with_capacity(header_json.len() + em.grid().mode_count() * 96 + 64);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header_json);
    for field in [&em.e, &em.b] {
        for c in field.coeff() {
            for z in c {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointHeader, EMState)> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < MAGIC.len() + 8 + 32 {
        return Err(Error::StateFile("file too short for a checkpoint".into()));
    }
    let (body, digest) = buf.split_at(buf.len() - 32);
    let expect = Sha256::digest(body);
    if digest != expect.as_slice() {
        return Err(Error::Integrity("checkpoint checksum mismatch".into()));
    }
    if &body[..MAGIC.len()] != MAGIC {
        return Err(Error::StateFile("bad magic bytes".into()));
    }
    let hlen =
        u64::from_le_bytes(body[MAGIC.len()..MAGIC.len() + 8].try_into().unwrap()) as usize;
    let hstart = MAGIC.len() + 8;
    if body.len() < hstart + hlen {
        return Err(Error::StateFile("truncated header".into()));
    }
    let header: CheckpointHeader = serde_json::from_slice(&body[hstart..hstart + hlen])?;
    let grid = Grid::new(header.l, header.n)?;
    let modes = grid.mode_count();
    let payload = &body[hstart + hlen..];
    if payload.len() != modes * 2 * 3 * 16 {
        return Err(Error::StateFile(format!(
            "payload is {} bytes, expected {} for N = {}",
            payload.len(),
            modes * 96,
            header.n
        )));
    }
    let mut cursor = payload;
    let mut read_field = || -> SpectralField3 {
        let mut coeff = vec![[Complex64::ZERO; 3]; modes];
        for c in coeff.iter_mut() {
            for z in c.iter_mut() {
                let re = f64::from_le_bytes(cursor[..8].try_into().unwrap());
                let im = f64::from_le_bytes(cursor[8..16].try_into().unwrap());
                *z = Complex64::new(re, im);
                cursor = &cursor[16..];
            }
        }
        SpectralField3::from_coeff(&grid, coeff, false).expect("sizes checked")
    };
    let mut e = read_field();
    let mut b = read_field();
    e.check_conjugate_symmetry()?;
    b.check_conjugate_symmetry()?;
    e.set_reality(true);
    b.set_reality(true);
    Ok((header, EMState { e, b }))
}

/// Reassemble a full phase-space state from a checkpoint.
pub fn system_state(header: &CheckpointHeader, em: EMState) -> SystemState {
    SystemState { particle: header.particle, em }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn sample() -> (CheckpointHeader, EMState) {
        let grid = Grid::new(16.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let em = EMState::new(
            SpectralField3::random(&grid, &mut rng, 2, 0.4),
            SpectralField3::random(&grid, &mut rng, 2, 0.4),
        )
        .unwrap();
        let header = CheckpointHeader {
            l: 16.0,
            n: 8,
            sigma: 1.0,
            e: 1.0,
            model: ModelKind::Newton,
            particle: ParticleState::newton([0.1, 0.2, 0.3], [0.4, 0.5, 0.6]),
            t: 1.25,
            params: PicardParams::default(),
            cadence: Some(Cadence { origin: 0.0, period: 0.5 }),
        };
        (header, em)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.mxnwt");
        let (header, em) = sample();
        save_checkpoint(&path, &header, &em).unwrap();
        let (h2, em2) = load_checkpoint(&path).unwrap();
        assert_eq!(h2.particle, header.particle);
        assert_eq!(h2.t, header.t);
        assert_eq!(h2.cadence, header.cadence);
        assert_eq!(em2.e.coeff(), em.e.coeff());
        assert_eq!(em2.b.coeff(), em.b.coeff());
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.mxnwt");
        let (header, em) = sample();
        save_checkpoint(&path, &header, &em).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        match load_checkpoint(&path) {
            Err(Error::Integrity(_)) => {}
            other => panic!("expected integrity failure, got {other:?}"),
        }
        // truncation
        std::fs::write(&path, &bytes[..16]).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    #[test]
    fn non_real_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.mxnwt");
        let (header, mut em) = sample();
        // break conjugate symmetry on a paired mode
        let grid: Arc<Grid> = em.grid().clone();
        let idx = grid.index_of_mode([1, 0, 0]);
        em.e.coeff_mut()[idx][0] += num_complex::Complex64::new(0.0, 0.5);
        em.e.set_reality(false);
        save_checkpoint(&path, &header, &em).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
