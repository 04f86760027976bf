//! Binary model format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic          8 bytes  "MLFERN01"
//! mode           u8       low 7 bits: 0 multi-label, 1 battery, 2 single-label
//!                         bit 7: leaf values stored as f32
//! K, D, C        u32 each (K = ferns per ensemble)
//! feature_count  u32
//! seed           u64
//! classes        C × (u32 byte length, UTF-8 bytes)
//! ferns          per fern: D × (u32 feature_index, f64 threshold),
//!                          2^D × columns leaf values, leaf-major
//! ```
//!
//! Multi-label and single-label models store `K` ferns with `C` columns.
//! Battery models store `C` blocks of `K` ferns with 2 columns each.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::train::MAX_DEPTH;
use super::{Fern, FernsModel, Mode, SplitCriterion};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"MLFERN01";
const F32_FLAG: u8 = 0x80;

/// Storage width of leaf values in a model file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    /// Halves the leaf payload; values are rounded to f32 on save.
    F32,
}

impl Precision {
    fn width(self) -> usize {
        match self {
            Precision::F64 => 8,
            Precision::F32 => 4,
        }
    }
}

fn mode_code(mode: Mode) -> u8 {
    match mode {
        Mode::MultiLabel => 0,
        Mode::Battery => 1,
        Mode::SingleLabel => 2,
    }
}

fn u32_field(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::Format(format!("{what} does not fit in 32 bits")))
}

impl FernsModel {
    /// Number of bytes [`write_to`](Self::write_to) produces.
    pub fn serialized_len(&self, precision: Precision) -> usize {
        let header = MAGIC.len() + 1 + 4 * 4 + 8;
        let catalog: usize = self.classes.iter().map(|c| 4 + c.len()).sum();
        let ferns: usize = self
            .ferns
            .iter()
            .map(|f| f.depth() * 12 + f.leaf_values().len() * precision.width())
            .sum();
        header + catalog + ferns
    }

    pub fn write_to<W: Write>(&self, w: &mut W, precision: Precision) -> Result<()> {
        let mut mode = mode_code(self.mode);
        if precision == Precision::F32 {
            mode |= F32_FLAG;
        }
        w.write_all(MAGIC)?;
        w.write_all(&[mode])?;
        for v in [
            self.ferns_per_ensemble,
            self.depth,
            self.classes.len(),
            self.feature_count,
        ] {
            w.write_all(&u32_field(v, "header field")?.to_le_bytes())?;
        }
        w.write_all(&self.seed.to_le_bytes())?;
        for class in &self.classes {
            w.write_all(&u32_field(class.len(), "class name length")?.to_le_bytes())?;
            w.write_all(class.as_bytes())?;
        }
        for fern in &self.ferns {
            for c in fern.criteria() {
                w.write_all(&u32_field(c.feature_index, "feature index")?.to_le_bytes())?;
                w.write_all(&c.threshold.to_le_bytes())?;
            }
            match precision {
                Precision::F64 => {
                    for v in fern.leaf_values() {
                        w.write_all(&v.to_le_bytes())?;
                    }
                }
                Precision::F32 => {
                    for v in fern.leaf_values() {
                        w.write_all(&(*v as f32).to_le_bytes())?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self, precision: Precision) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.serialized_len(precision));
        self.write_to(&mut out, precision)?;
        Ok(out)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P, precision: Precision) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w, precision)?;
        w.flush()?;
        Ok(())
    }

    /// Reads a model, rejecting trailing bytes and any structural violation.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let mode_byte = read_u8(r)?;
        let precision = if mode_byte & F32_FLAG != 0 {
            Precision::F32
        } else {
            Precision::F64
        };
        let mode = match mode_byte & !F32_FLAG {
            0 => Mode::MultiLabel,
            1 => Mode::Battery,
            2 => Mode::SingleLabel,
            other => return Err(Error::Format(format!("unknown mode {other}"))),
        };
        let ferns_per_ensemble = read_u32(r)? as usize;
        let depth = read_u32(r)? as usize;
        let class_count = read_u32(r)? as usize;
        let feature_count = read_u32(r)? as usize;
        let seed = read_u64(r)?;
        if ferns_per_ensemble == 0 || class_count == 0 || feature_count == 0 {
            return Err(Error::Format("zero-sized header field".into()));
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::Format(format!("depth {depth} out of range")));
        }

        let mut classes: Vec<String> = Vec::new();
        for _ in 0..class_count {
            let len = read_u32(r)? as usize;
            let mut bytes = Vec::new();
            r.by_ref()
                .take(len as u64)
                .read_to_end(&mut bytes)
                .map_err(truncated)?;
            if bytes.len() != len {
                return Err(Error::Format("truncated file".into()));
            }
            let name = String::from_utf8(bytes)
                .map_err(|_| Error::Format("class name is not UTF-8".into()))?;
            if classes.contains(&name) {
                return Err(Error::Format(format!("duplicate class `{name}`")));
            }
            classes.push(name);
        }

        let (fern_count, columns) = match mode {
            Mode::Battery => (class_count * ferns_per_ensemble, 2),
            Mode::MultiLabel | Mode::SingleLabel => (ferns_per_ensemble, class_count),
        };
        let leaf_values = (1usize << depth) * columns;
        let mut ferns = Vec::with_capacity(fern_count.min(1 << 16));
        for _ in 0..fern_count {
            let mut criteria = Vec::with_capacity(depth);
            for _ in 0..depth {
                let feature_index = read_u32(r)? as usize;
                let threshold = read_f64(r)?;
                if feature_index >= feature_count || !threshold.is_finite() {
                    return Err(Error::Format("invalid split criterion".into()));
                }
                criteria.push(SplitCriterion {
                    feature_index,
                    threshold,
                });
            }
            let leaves = read_leaves(r, leaf_values, precision)?;
            ferns.push(Fern::new(criteria, columns, leaves));
        }
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(Error::Format("trailing bytes after last fern".into()));
        }
        Ok(FernsModel {
            mode,
            classes,
            depth,
            ferns_per_ensemble,
            feature_count,
            seed,
            ferns,
        })
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut bytes)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

fn truncated(err: std::io::Error) -> Error {
    if err.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated file".into())
    } else {
        Error::Io(err)
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(buf)
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    Ok(read_array::<1, _>(r)?[0])
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn read_leaves<R: Read>(r: &mut R, count: usize, precision: Precision) -> Result<Vec<f64>> {
    const CHUNK: usize = 4096;
    let width = precision.width();
    let mut out = Vec::with_capacity(count.min(CHUNK));
    let mut buf = vec![0u8; CHUNK * width];
    let mut left = count;
    while left > 0 {
        let n = left.min(CHUNK);
        let bytes = &mut buf[..n * width];
        r.read_exact(bytes).map_err(truncated)?;
        match precision {
            Precision::F64 => out.extend(
                bytes
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap())),
            ),
            Precision::F32 => out.extend(
                bytes
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64),
            ),
        }
        left -= n;
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("non-finite leaf value".into()));
    }
    Ok(out)
}
