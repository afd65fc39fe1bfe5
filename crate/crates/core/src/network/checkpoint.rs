//! Binary checkpoint container.
//!
//! Layout (all integers little endian):
//!
//! ```text
//! magic      8 bytes  "AGRLSTM\0"
//! version    u32
//! gate order 4 bytes  "IFGO"
//! vocab, embed, hidden, seed   4 × u64
//! 5 blocks:  name length u32, name bytes, value count u64, values as f64 bits
//! ```

use std::io::{Read, Write};

use super::{Blocks, Dims, ModelParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"AGRLSTM\0";
pub const CHECKPOINT_VERSION: u32 = 1;
pub const GATE_ORDER: &[u8; 4] = b"IFGO";

pub fn write_checkpoint<W: Write>(params: &ModelParams, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(GATE_ORDER)?;
    for v in [
        params.dims.vocab as u64,
        params.dims.embed as u64,
        params.dims.hidden as u64,
        params.seed,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    for (name, block) in params.blocks() {
        out.write_all(&(name.len() as u32).to_le_bytes())?;
        out.write_all(name.as_bytes())?;
        out.write_all(&(block.len() as u64).to_le_bytes())?;
        let mut bytes = Vec::with_capacity(block.len() * 8);
        for v in block {
            bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        out.write_all(&bytes)?;
    }
    out.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input
        .read_exact(&mut buf)
        .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
    Ok(buf)
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array::<8, _>(input)?))
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<ModelParams> {
    if &read_array::<8, _>(&mut input)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(read_array::<4, _>(&mut input)?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let order = read_array::<4, _>(&mut input)?;
    if &order != GATE_ORDER {
        return Err(Error::Checkpoint(format!(
            "gate order {:?} is not IFGO",
            String::from_utf8_lossy(&order)
        )));
    }
    let to_usize = |v: u64| usize::try_from(v).map_err(|_| Error::Checkpoint("dimension overflow".into()));
    let dims = Dims {
        vocab: to_usize(read_u64(&mut input)?)?,
        embed: to_usize(read_u64(&mut input)?)?,
        hidden: to_usize(read_u64(&mut input)?)?,
    };
    let seed = read_u64(&mut input)?;
    let mut params = ModelParams::zeros(dims);
    params.seed = seed;
    for (name, block) in params.blocks_mut() {
        let len = u32::from_le_bytes(read_array::<4, _>(&mut input)?) as usize;
        let mut stored = vec![0u8; len];
        input
            .read_exact(&mut stored)
            .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
        if stored != name.as_bytes() {
            return Err(Error::Checkpoint(format!(
                "expected block `{name}`, found `{}`",
                String::from_utf8_lossy(&stored)
            )));
        }
        let count = to_usize(read_u64(&mut input)?)?;
        if count != block.len() {
            return Err(Error::Checkpoint(format!(
                "block `{name}` holds {count} values, dimensions require {}",
                block.len()
            )));
        }
        let mut bytes = vec![0u8; count * 8];
        input
            .read_exact(&mut bytes)
            .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
        for (slot, chunk) in block.iter_mut().zip(bytes.chunks_exact(8)) {
            *slot = f64::from_bits(u64::from_le_bytes(chunk.try_into().unwrap()));
        }
    }
    if let Some(block) = params.first_non_finite() {
        return Err(Error::Checkpoint(format!("non-finite values in `{block}`")));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::super::{forward, init_params};
    use super::*;
    use crate::corpus::TokenId;

    #[test]
    fn round_trip_is_bit_exact() {
        let p = init_params(Dims::new(17, 4, 6), 99).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&p, &mut bytes).unwrap();
        let q = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(p, q);
        for (a, b) in p.blocks().iter().zip(q.blocks().iter()) {
            assert!(a.1.iter().zip(b.1).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        let t = [TokenId(3), TokenId(16), TokenId(0)];
        assert_eq!(forward(&p, &t).unwrap().to_bits(), forward(&q, &t).unwrap().to_bits());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let p = init_params(Dims::new(5, 2, 2), 1).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&p, &mut bytes).unwrap();
        assert!(read_checkpoint(&bytes[..bytes.len() - 3]).is_err());
        let mut wrong = bytes.clone();
        wrong[8] = 7;
        assert!(read_checkpoint(wrong.as_slice()).is_err());
        let mut wrong = bytes.clone();
        wrong[12] = b'X';
        assert!(read_checkpoint(wrong.as_slice()).is_err());
        assert!(read_checkpoint(&b"garbage!"[..]).is_err());
    }
}
