use std::io::{BufRead, Write};

use super::SparseMatrix;
use crate::error::{Error, Result};

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Writes `a` in MatrixMarket coordinate format with 1-based indices.
pub fn write_matrix_market(a: &SparseMatrix, mut w: impl Write) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads a matrix written by [`write_matrix_market`].
pub fn read_matrix_market(r: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = r.lines().enumerate();
    let parse_err = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
    let (_, first) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    if first?.trim() != HEADER {
        return Err(parse_err(0, "unsupported header"));
    }
    let mut dims: Option<(usize, usize)> = None;
    let mut trip = Vec::new();
    for (ln, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(ln, "expected three fields"));
        }
        match dims {
            None => {
                let r = f[0].parse().map_err(|_| parse_err(ln, "bad row count"))?;
                let c = f[1].parse().map_err(|_| parse_err(ln, "bad column count"))?;
                dims = Some((r, c));
            }
            Some(_) => {
                let i: usize = f[0].parse().map_err(|_| parse_err(ln, "bad row index"))?;
                let j: usize = f[1].parse().map_err(|_| parse_err(ln, "bad column index"))?;
                let v: f64 = f[2].parse().map_err(|_| parse_err(ln, "bad value"))?;
                if i == 0 || j == 0 {
                    return Err(parse_err(ln, "indices are 1-based"));
                }
                trip.push((i - 1, j - 1, v));
            }
        }
    }
    let (nr, nc) = dims.ok_or_else(|| parse_err(1, "missing size line"))?;
    if trip.iter().any(|&(i, j, _)| i >= nr || j >= nc) {
        return Err(parse_err(1, "index out of range"));
    }
    Ok(SparseMatrix::from_triplets(nr, nc, &trip))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 1, 0.1), (1, 2, -1.0 / 3.0)]);
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(HEADER));
        assert!(text.contains("\n1 2 "));
        let b = read_matrix_market(&buf[..]).unwrap();
        assert_eq!(a, b);
    }
}
