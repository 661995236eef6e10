//! The TGTB binary dataset format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  ASCII "TGTB"
//! version u32      = 1
//! order   u32      N
//! dims    N × u64  I₁ … I_N
//! count   u64      T
//! payload T·K f64  IEEE-754 LE, one sample after another,
//!                  each stored mode-1-fastest
//! ```
//!
//! Readers reject wrong magic/version and any length mismatch, so files
//! round-trip bit-exactly or not at all.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use tengauss_core::tensor::tensorize;
use tengauss_core::{Error, Result, SampleSet};

pub const MAGIC: [u8; 4] = *b"TGTB";
pub const VERSION: u32 = 1;

pub fn write_dataset(path: &Path, data: &SampleSet) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(data.shape().len() as u32).to_le_bytes())?;
    for &dim in data.shape() {
        out.write_all(&(dim as u64).to_le_bytes())?;
    }
    out.write_all(&(data.len() as u64).to_le_bytes())?;
    for sample in data.iter() {
        for value in sample.data() {
            out.write_all(&value.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<SampleSet> {
    let file = File::open(path)?;
    let expected_len = file.metadata()?.len();
    let mut reader = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact(&mut reader, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected \"TGTB\"",
            magic
        )));
    }
    let version = read_u32(&mut reader, "version")?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let order = read_u32(&mut reader, "order")? as usize;
    if order == 0 || order > 64 {
        return Err(Error::Format(format!("implausible order {order}")));
    }
    let mut shape = Vec::with_capacity(order);
    let mut k: u64 = 1;
    for n in 0..order {
        let dim = read_u64(&mut reader, "dims")?;
        if dim == 0 {
            return Err(Error::Format(format!("mode {} has extent 0", n + 1)));
        }
        k = k
            .checked_mul(dim)
            .ok_or_else(|| Error::Format("element count overflows".into()))?;
        shape.push(dim as usize);
    }
    let count = read_u64(&mut reader, "count")?;
    if count == 0 {
        return Err(Error::Format("dataset holds zero samples".into()));
    }

    let header_len = 4 + 4 + 4 + 8 * order as u64 + 8;
    let payload_len = count
        .checked_mul(k)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Format("payload length overflows".into()))?;
    if expected_len != header_len + payload_len {
        return Err(Error::Format(format!(
            "file is {} bytes, header demands {}",
            expected_len,
            header_len + payload_len
        )));
    }

    let k = k as usize;
    let mut samples = Vec::with_capacity(count as usize);
    let mut buf = vec![0u8; k * 8];
    for _ in 0..count {
        read_exact(&mut reader, &mut buf, "payload")?;
        let values: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        samples.push(tensorize(&values, &shape)?);
    }
    SampleSet::new(samples)
}

fn read_exact(reader: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    reader
        .read_exact(buf)
        .map_err(|e| Error::Format(format!("truncated {what}: {e}")))
}

fn read_u32(reader: &mut impl Read, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(reader, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(reader: &mut impl Read, what: &str) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_exact(reader, &mut buf, what)?;
    Ok(u64::from_le_bytes(buf))
}
