//! Binary field files.
//!
//! Layout (all integers little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `DPRE` |
//! | 2 | version `u16 = 1` |
//! | 2 | dimension `u16` |
//! | 4 | `t_min: i32` |
//! | 4 | `t_max: i32` |
//! | 4 | anchor time `i32` (anchor site is the origin) |
//! | 1 | law id `u8` (0 Gaussian, 1 uniform, 2 Rademacher) |
//! | 8 | `master_seed: u64` |
//! | 8 | `sample_index: u64` |
//! | 8 | `site_count: u64` |
//! | 8·n | values as IEEE-754 doubles, `t` ascending then lexicographic site |
//!
//! Enumerated fields store `master_seed = u64::MAX` and the pattern index
//! as `sample_index`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::lattice::build_cone;

use super::field::{EnvironmentField, Provenance};
use super::law::DisorderLaw;
use super::DisorderError;

pub const MAGIC: [u8; 4] = *b"DPRE";
pub const VERSION: u16 = 1;
pub const ENUMERATED_SEED: u64 = u64::MAX;
/// Bytes before the first value.
pub const HEADER_LEN: usize = 4 + 2 + 2 + 4 + 4 + 4 + 1 + 8 + 8 + 8;

fn format_err(msg: impl Into<String>) -> DisorderError {
    DisorderError::Format(msg.into())
}

pub fn write_field<W: Write>(field: &EnvironmentField, mut out: W) -> Result<(), DisorderError> {
    let cone = field.cone();
    if cone.anchor_site().iter().any(|&x| x != 0) {
        return Err(format_err("field files only store cones anchored at the origin"));
    }
    let dim = u16::try_from(cone.dim()).map_err(|_| format_err("dimension does not fit in u16"))?;
    let to_i32 = |v: i64, what: &str| {
        i32::try_from(v).map_err(|_| format_err(format!("{what} = {v} does not fit in i32")))
    };
    let (seed, index) = match field.provenance() {
        Provenance::Sampled {
            master_seed,
            sample_index,
        } => (master_seed, sample_index),
        Provenance::Enumerated { index } => (ENUMERATED_SEED, index),
    };
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&dim.to_le_bytes());
    header.extend_from_slice(&to_i32(cone.t_min(), "t_min")?.to_le_bytes());
    header.extend_from_slice(&to_i32(cone.t_max(), "t_max")?.to_le_bytes());
    header.extend_from_slice(&to_i32(cone.anchor_time(), "anchor time")?.to_le_bytes());
    header.push(field.law().id());
    header.extend_from_slice(&seed.to_le_bytes());
    header.extend_from_slice(&index.to_le_bytes());
    header.extend_from_slice(&(field.values().len() as u64).to_le_bytes());
    out.write_all(&header)?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(mut input: R) -> Result<EnvironmentField, DisorderError> {
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|_| format_err("truncated header"))?;
    if header[0..4] != MAGIC {
        return Err(format_err(format!("bad magic {:?}", &header[0..4])));
    }
    let mut at = 4;
    let mut take = |n: usize| {
        let s = &header[at..at + n];
        at += n;
        s
    };
    let version = u16::from_le_bytes(take(2).try_into().unwrap());
    if version != VERSION {
        return Err(format_err(format!("unsupported version {version}")));
    }
    let dim = u16::from_le_bytes(take(2).try_into().unwrap()) as usize;
    let t_min = i32::from_le_bytes(take(4).try_into().unwrap()) as i64;
    let t_max = i32::from_le_bytes(take(4).try_into().unwrap()) as i64;
    let anchor = i32::from_le_bytes(take(4).try_into().unwrap()) as i64;
    let law_id = take(1)[0];
    let seed = u64::from_le_bytes(take(8).try_into().unwrap());
    let index = u64::from_le_bytes(take(8).try_into().unwrap());
    let count = u64::from_le_bytes(take(8).try_into().unwrap());

    let law = DisorderLaw::from_id(law_id).ok_or_else(|| format_err(format!("unknown law id {law_id}")))?;
    let cone = build_cone(dim, t_min, t_max, (anchor, &vec![0; dim]))?;
    if count != cone.site_count() as u64 {
        return Err(format_err(format!(
            "header declares {count} sites, the window has {}",
            cone.site_count()
        )));
    }
    let mut values = Vec::with_capacity(cone.site_count());
    let mut buf = [0u8; 8];
    for i in 0..cone.site_count() {
        input
            .read_exact(&mut buf)
            .map_err(|_| format_err(format!("truncated payload: {i} of {count} values")))?;
        values.push(f64::from_le_bytes(buf));
    }
    if input.read(&mut buf)? != 0 {
        return Err(format_err("trailing bytes after payload"));
    }
    let provenance = if seed == ENUMERATED_SEED {
        Provenance::Enumerated { index }
    } else {
        Provenance::Sampled {
            master_seed: seed,
            sample_index: index,
        }
    };
    EnvironmentField::from_values(cone, law, values, provenance)
}

pub fn save_field(field: &EnvironmentField, path: impl AsRef<Path>) -> Result<(), DisorderError> {
    write_field(field, BufWriter::new(File::create(path)?))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<EnvironmentField, DisorderError> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::sample_environment;
    use crate::lattice::{build_cone, forward_cone};

    fn bytes_of(field: &EnvironmentField) -> Vec<u8> {
        let mut out = Vec::new();
        write_field(field, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip() {
        let cone = build_cone(2, -3, 1, (-5, &[0, 0])).unwrap();
        let f = sample_environment(&cone, DisorderLaw::StandardGaussian, 42, 7);
        let back = read_field(bytes_of(&f).as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn documented_offset() {
        // d = 1, window [0, 2] from (0, 0): sites (0,0) (1,-1) (1,1) (2,-2) (2,0) (2,2).
        let cone = forward_cone(1, 2).unwrap();
        let f = sample_environment(&cone, DisorderLaw::UniformBounded, 1, 1);
        let bytes = bytes_of(&f);
        let at = HEADER_LEN + 8 * 4; // (2, 0)
        let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        use crate::disorder::Environment;
        assert_eq!(v, f.value(2, &[0]).unwrap());
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 6);
    }

    #[test]
    fn corrupted_inputs() {
        let cone = forward_cone(1, 2).unwrap();
        let f = sample_environment(&cone, DisorderLaw::Rademacher, 1, 1);
        let good = bytes_of(&f);

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(read_field(bad.as_slice()), Err(DisorderError::Format(_))));

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(read_field(bad.as_slice()).is_err());

        let bad = &good[..good.len() - 3];
        assert!(read_field(bad).is_err());

        let mut bad = good.clone();
        bad.push(0);
        assert!(read_field(bad.as_slice()).is_err());

        assert!(read_field(&good[..10]).is_err());
    }
}
