//! Plain-text mesh format:
//!
//! ```text
//! vertices <n>
//! <index> <x> <y> <z>
//! tets <m>
//! <index> <a> <b> <c> <d>
//! boundary <k>            (optional)
//! <a> <b> <c>             (sorted boundary face)
//! ```
//!
//! Coordinates are written with 17 significant digits so they round-trip exactly.

use std::io::{BufRead, Write};

use super::TetMesh;
use crate::error::{Error, Result};
use crate::geometry::Point3;

pub fn write_mesh(mesh: &TetMesh, mut w: impl Write) -> Result<()> {
    writeln!(w, "vertices {}", mesh.num_vertices())?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{i} {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    writeln!(w, "tets {}", mesh.num_tets())?;
    for (k, t) in mesh.tets().iter().enumerate() {
        writeln!(w, "{k} {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    let bf: Vec<_> = (0..mesh.num_faces()).filter(|&f| mesh.boundary_face()[f]).collect();
    writeln!(w, "boundary {}", bf.len())?;
    for f in bf {
        let [a, b, c] = mesh.faces()[f];
        writeln!(w, "{a} {b} {c}")?;
    }
    Ok(())
}

/// Reads a mesh. If a `boundary` section is present it must agree with the
/// boundary computed from the tets.
pub fn read_mesh(r: impl BufRead) -> Result<TetMesh> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(n, l)| l.map(|l| (n + 1, l)))
        .filter(|l| l.as_ref().map(|(_, s)| !s.trim().is_empty()).unwrap_or(true));
    let mut next = || -> Result<Option<(usize, Vec<String>)>> {
        match lines.next() {
            None => Ok(None),
            Some(l) => {
                let (n, s) = l?;
                Ok(Some((n, s.split_whitespace().map(str::to_string).collect())))
            }
        }
    };
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let header = |tok: Option<(usize, Vec<String>)>, name: &str| -> Result<(usize, usize)> {
        let (n, f) = tok.ok_or_else(|| err(0, &format!("missing '{name}' section")))?;
        if f.len() != 2 || f[0] != name {
            return Err(err(n, &format!("expected '{name} <count>'")));
        }
        Ok((n, f[1].parse().map_err(|_| err(n, "bad count"))?))
    };
    let (_, nv) = header(next()?, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (n, f) = next()?.ok_or_else(|| err(0, "truncated vertex list"))?;
        if f.len() != 4 || f[0].parse::<usize>().ok() != Some(i) {
            return Err(err(n, "expected '<index> x y z'"));
        }
        let c: Vec<f64> =
            f[1..].iter().map(|s| s.parse::<f64>()).collect::<std::result::Result<_, _>>()
                .map_err(|_| err(n, "bad coordinate"))?;
        vertices.push(Point3::new(c[0], c[1], c[2]));
    }
    let (_, nt) = header(next()?, "tets")?;
    let mut tets = Vec::with_capacity(nt);
    for k in 0..nt {
        let (n, f) = next()?.ok_or_else(|| err(0, "truncated tet list"))?;
        if f.len() != 5 || f[0].parse::<usize>().ok() != Some(k) {
            return Err(err(n, "expected '<index> a b c d'"));
        }
        let v: Vec<usize> =
            f[1..].iter().map(|s| s.parse::<usize>()).collect::<std::result::Result<_, _>>()
                .map_err(|_| err(n, "bad vertex index"))?;
        tets.push([v[0], v[1], v[2], v[3]]);
    }
    let mesh = TetMesh::new(vertices, tets)?;
    if let Some(tok) = next()? {
        let (line, nb) = header(Some(tok), "boundary")?;
        let mut flagged = vec![false; mesh.num_faces()];
        for _ in 0..nb {
            let (n, f) = next()?.ok_or_else(|| err(line, "truncated boundary list"))?;
            let v: Vec<usize> = f.iter().map(|s| s.parse::<usize>()).collect::<std::result::Result<_, _>>()
                .map_err(|_| err(n, "bad face index"))?;
            if v.len() != 3 {
                return Err(err(n, "expected three vertex indices"));
            }
            let mut key = [v[0], v[1], v[2]];
            key.sort_unstable();
            let fi = mesh.faces().binary_search(&key).map_err(|_| err(n, "unknown face"))?;
            flagged[fi] = true;
        }
        if flagged != mesh.boundary_face() {
            return Err(err(line, "boundary section disagrees with the tet list"));
        }
    }
    Ok(mesh)
}
