//! CSV and binary layouts for matrix sections.
//!
//! Binary layout: `b"GHNK"`, u32 version, u64 K (rows), u64 N (lattice
//! dimension, 1 for linear sections), then K·K pairs of little-endian f64
//! (re, im) in row-major order.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::C64;

use super::TruncatedMatrix;

pub const MAGIC: &[u8; 4] = b"GHNK";
pub const VERSION: u32 = 1;

/// Row-major CSV with header `re_0,im_0,re_1,im_1,...`.
pub fn write_csv<W: Write>(m: &CMat, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..m.ncols()).flat_map(|j| [format!("re_{j}"), format!("im_{j}")]).collect();
    w.write_record(&header)?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .flat_map(|j| {
                let z = m[(i, j)];
                [format!("{:e}", z.re), format!("{:e}", z.im)]
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<CMat> {
    let mut r = csv::Reader::from_reader(input);
    let cols = r.headers()?.len();
    if cols % 2 != 0 {
        return Err(Error::InvalidInput("odd number of CSV columns".into()));
    }
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("bad number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        rows.push(vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let n = cols / 2;
    Ok(CMat::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

pub fn write_binary<W: Write>(t: &TruncatedMatrix, mut out: W) -> Result<()> {
    let k = t.size();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(k as u64).to_le_bytes())?;
    out.write_all(&(t.lattice_dim() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * k * k);
    for i in 0..k {
        for j in 0..t.entries.ncols() {
            let z = t.entries[(i, j)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Returns the square matrix and the recorded lattice dimension.
pub fn read_binary<R: Read>(mut input: R) -> Result<(CMat, usize)> {
    let mut head = [0u8; 24];
    input.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::InvalidInput("missing GHNK magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::InvalidInput(format!("unsupported GHNK version {version}")));
    }
    let k = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let dim = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
    let mut body = vec![0u8; 16 * k * k];
    input.read_exact(&mut body)?;
    let f = |off: usize| f64::from_le_bytes(body[off..off + 8].try_into().unwrap());
    let m = CMat::from_fn(k, k, |i, j| {
        let off = 16 * (i * k + j);
        C64::new(f(off), f(off + 8))
    });
    Ok((m, dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMat {
        CMat::from_fn(3, 3, |i, j| C64::new(i as f64 + 0.25, j as f64 - 1.0 / 3.0))
    }

    #[test]
    fn csv_round_trip() {
        let m = sample();
        let mut buf = Vec::new();
        write_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("re_0,im_0,re_1,im_1,re_2,im_2\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), m);
    }

    #[test]
    fn binary_round_trip() {
        let t = TruncatedMatrix::linear(sample(), "test");
        let mut buf = Vec::new();
        write_binary(&t, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"GHNK");
        assert_eq!(buf.len(), 24 + 16 * 9);
        let (m, dim) = read_binary(&buf[..]).unwrap();
        assert_eq!(m, t.entries);
        assert_eq!(dim, 1);
    }

    #[test]
    fn binary_rejects_bad_magic() {
        assert!(read_binary(&b"XXXX\x01\0\0\0"[..]).is_err());
    }
}
