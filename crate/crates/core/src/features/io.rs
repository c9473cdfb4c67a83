//! Columnar binary encodings of feature artifacts. All integers and floats
//! are little-endian; strings are a `u32` byte length followed by UTF-8.
//!
//! Matrix (`LBFM`, version 1):
//!
//! ```text
//! magic "LBFM" | version u32 | n_rows u64 | n_cols u32
//! n_rows x account_id string | n_cols x feature_id string
//! n_cols columns, each n_rows x f64
//! ```
//!
//! Temporal cube (`LBFC`, version 1), sparse over (account, period):
//!
//! ```text
//! magic "LBFC" | version u32 | granularity u8 (0 year, 1 month, 2 day)
//! n_periods u32 | first period label string        (periods are contiguous)
//! n_accounts u64 | n_features u32
//! n_accounts x account_id string | n_features x feature_id string
//! n_cells u64 | n_cells x account index u32 | n_cells x period index u32
//! n_features columns, each n_cells x f64
//! ```

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use super::{FeatureMatrix, TemporalFeatureCube};
use crate::time::{Granularity, Period};

const MATRIX_MAGIC: &[u8; 4] = b"LBFM";
const CUBE_MAGIC: &[u8; 4] = b"LBFC";
const VERSION: u32 = 1;

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> io::Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(invalid("truncated feature file"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> io::Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> io::Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> io::Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| invalid("invalid utf-8"))
    }

    fn strings(&mut self, n: usize) -> io::Result<Vec<String>> {
        (0..n).map(|_| self.string()).collect()
    }

    fn header(&mut self, magic: &[u8; 4]) -> io::Result<()> {
        if self.take(4)? != magic {
            return Err(invalid("bad magic"));
        }
        match self.u32()? {
            VERSION => Ok(()),
            v => Err(invalid(format!("unsupported version {v}"))),
        }
    }
}

pub fn encode_matrix(m: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + m.values().len() * 8);
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.n_rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.n_cols() as u32).to_le_bytes());
    m.account_ids().iter().for_each(|s| put_str(&mut out, s));
    m.feature_ids().iter().for_each(|s| put_str(&mut out, s));
    for c in 0..m.n_cols() {
        for r in 0..m.n_rows() {
            out.extend_from_slice(&m.get(r, c).to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(buf: &[u8]) -> io::Result<FeatureMatrix> {
    let mut cur = Cursor { buf };
    cur.header(MATRIX_MAGIC)?;
    let n = cur.u64()? as usize;
    let m = cur.u32()? as usize;
    let accounts = cur.strings(n)?;
    let features = cur.strings(m)?;
    let mut values = vec![0.0; n * m];
    for c in 0..m {
        for r in 0..n {
            values[r * m + c] = cur.f64()?;
        }
    }
    FeatureMatrix::new(accounts, features, values).map_err(|e| invalid(e.to_string()))
}

pub fn encode_cube(cube: &TemporalFeatureCube) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CUBE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match cube.granularity {
        Granularity::Year => 0,
        Granularity::Month => 1,
        Granularity::Day => 2,
    });
    out.extend_from_slice(&(cube.periods.len() as u32).to_le_bytes());
    put_str(&mut out, &cube.periods.first().map(Period::label).unwrap_or_default());
    out.extend_from_slice(&(cube.account_ids.len() as u64).to_le_bytes());
    out.extend_from_slice(&(cube.feature_ids.len() as u32).to_le_bytes());
    cube.account_ids.iter().for_each(|s| put_str(&mut out, s));
    cube.feature_ids.iter().for_each(|s| put_str(&mut out, s));

    let cells: Vec<(u32, u32, &Vec<f64>)> =
        cube.cells.iter().enumerate().flat_map(|(a, rows)| rows.iter().map(move |(p, row)| (a as u32, *p, row))).collect();
    out.extend_from_slice(&(cells.len() as u64).to_le_bytes());
    cells.iter().for_each(|(a, _, _)| out.extend_from_slice(&a.to_le_bytes()));
    cells.iter().for_each(|(_, p, _)| out.extend_from_slice(&p.to_le_bytes()));
    for f in 0..cube.feature_ids.len() {
        cells.iter().for_each(|(_, _, row)| out.extend_from_slice(&row[f].to_le_bytes()));
    }
    out
}

pub fn decode_cube(buf: &[u8]) -> io::Result<TemporalFeatureCube> {
    let mut cur = Cursor { buf };
    cur.header(CUBE_MAGIC)?;
    let granularity = match cur.u8()? {
        0 => Granularity::Year,
        1 => Granularity::Month,
        2 => Granularity::Day,
        g => return Err(invalid(format!("bad granularity {g}"))),
    };
    let n_periods = cur.u32()? as usize;
    let first = cur.string()?;
    let mut periods = Vec::with_capacity(n_periods);
    if n_periods > 0 {
        let mut p: Period = first.parse().map_err(|_| invalid("bad period label"))?;
        if p.granularity() != granularity {
            return Err(invalid("period granularity mismatch"));
        }
        for _ in 0..n_periods {
            periods.push(p);
            p = p.next();
        }
    }
    let n_accounts = cur.u64()? as usize;
    let n_features = cur.u32()? as usize;
    let account_ids = cur.strings(n_accounts)?;
    let feature_ids = cur.strings(n_features)?;
    let n_cells = cur.u64()? as usize;
    let accts: Vec<u32> = (0..n_cells).map(|_| cur.u32()).collect::<io::Result<_>>()?;
    let pers: Vec<u32> = (0..n_cells).map(|_| cur.u32()).collect::<io::Result<_>>()?;
    let mut rows = vec![vec![0.0; n_features]; n_cells];
    for f in 0..n_features {
        for row in rows.iter_mut() {
            row[f] = cur.f64()?;
        }
    }
    let mut cells = vec![BTreeMap::new(); n_accounts];
    for ((a, p), row) in accts.into_iter().zip(pers).zip(rows) {
        if a as usize >= n_accounts || p as usize >= n_periods {
            return Err(invalid("cell index out of range"));
        }
        cells[a as usize].insert(p, row);
    }
    Ok(TemporalFeatureCube { granularity, periods, account_ids, feature_ids, cells })
}

pub fn write_matrix(w: &mut impl Write, m: &FeatureMatrix) -> io::Result<()> {
    w.write_all(&encode_matrix(m))
}

pub fn read_matrix(r: &mut impl Read) -> io::Result<FeatureMatrix> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    decode_matrix(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_static, extract_temporal};
    use crate::sentiment::Lexicon;
    use crate::synthetic::{generate, SyntheticConfig};

    #[test]
    fn matrix_and_cube_roundtrip() {
        let c = generate(&SyntheticConfig::small(15));
        let lex = Lexicon::bundled();
        let m = extract_static(&c, &lex).unwrap();
        assert_eq!(decode_matrix(&encode_matrix(&m)).unwrap(), m);
        for g in Granularity::ALL {
            let cube = extract_temporal(&c, &lex, g).unwrap();
            assert_eq!(decode_cube(&encode_cube(&cube)).unwrap(), cube);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_matrix(b"nope").is_err());
        let c = generate(&SyntheticConfig::small(3));
        let m = extract_static(&c, &Lexicon::bundled()).unwrap();
        let bytes = encode_matrix(&m);
        assert!(decode_matrix(&bytes[..bytes.len() - 3]).is_err());
    }
}
