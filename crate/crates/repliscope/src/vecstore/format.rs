//! VDS binary format, little-endian:
//!
//! ```text
//! magic "VDS1" | u8 dtype (1 = f32) | u8 space_tag | u16 reserved
//! | u32 dim | u64 count | count*dim f32 row-major
//! | u32 id_block_len | newline-separated UTF-8 source ids
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{SpaceTag, VectorDataset};

const MAGIC: [u8; 4] = *b"VDS1";
const DTYPE_F32: u8 = 1;
const HEADER_LEN: u64 = 4 + 1 + 1 + 2 + 4 + 8;

pub fn write_vds(ds: &VectorDataset<f32>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&[DTYPE_F32, ds.space_tag().code()])?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&(ds.dim() as u32).to_le_bytes())?;
    w.write_all(&(ds.count() as u64).to_le_bytes())?;
    for v in ds.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    match ds.source_ids() {
        Some(ids) => {
            let block = ids.join("\n");
            w.write_all(&(block.len() as u32).to_le_bytes())?;
            w.write_all(block.as_bytes())?;
        }
        None => w.write_all(&0u32.to_le_bytes())?,
    }
    w.flush()?;
    Ok(())
}

pub fn read_vds(path: &Path) -> Result<VectorDataset<f32>> {
    let file_len = std::fs::metadata(path)?.len();
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut magic, HEADER_LEN, file_len)?;
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let mut head = [0u8; 16];
    read_exact_or_truncated(&mut r, &mut head, HEADER_LEN, file_len)?;
    let dtype = head[0];
    if dtype != DTYPE_F32 {
        return Err(Error::Format(format!("unsupported dtype code {dtype}")));
    }
    let space_tag = SpaceTag::from_code(head[1])?;
    let dim = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    if dim == 0 || count == 0 {
        return Err(Error::Format(format!("invalid shape {count} x {dim}")));
    }

    let matrix_bytes = (count as u64) * (dim as u64) * 4;
    let min_len = HEADER_LEN + matrix_bytes + 4;
    if file_len < min_len {
        return Err(Error::Truncated { expected: min_len, actual: file_len });
    }

    let mut values = vec![0f32; count * dim];
    let mut buf = [0u8; 4];
    for v in values.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f32::from_le_bytes(buf);
    }

    r.read_exact(&mut buf)?;
    let id_block_len = u32::from_le_bytes(buf) as u64;
    let expected = min_len + id_block_len;
    if file_len < expected {
        return Err(Error::Truncated { expected, actual: file_len });
    }
    let source_ids = if id_block_len == 0 {
        None
    } else {
        let mut block = vec![0u8; id_block_len as usize];
        r.read_exact(&mut block)?;
        let block = String::from_utf8(block)
            .map_err(|e| Error::Format(format!("id block is not UTF-8: {e}")))?;
        let ids: Vec<String> = block.split('\n').map(str::to_owned).collect();
        if ids.len() != count {
            return Err(Error::Format(format!(
                "id block holds {} ids but count is {count}",
                ids.len()
            )));
        }
        Some(ids)
    };

    VectorDataset::new(count, dim, values, source_ids, space_tag)
}

fn read_exact_or_truncated(
    r: &mut impl Read,
    buf: &mut [u8],
    expected: u64,
    actual: u64,
) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Truncated { expected, actual })
}
