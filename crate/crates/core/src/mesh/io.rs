//! Plain-text mesh format.
//!
//! ```text
//! # comment lines start with '#'
//! N_h N_T
//! x y b        (N_h lines, b = 1 on the boundary)
//! i j k        (N_T lines, 0-based vertex ids)
//! ```
//! Coordinates are written with the shortest representation that parses back
//! to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::TriMesh;
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let _ = writeln!(out, "# vertices triangles");
    let _ = writeln!(out, "{} {}", mesh.num_vertices(), mesh.num_triangles());
    for (v, p) in mesh.vertices().iter().enumerate() {
        // adding 0.0 turns -0.0 into 0.0
        let _ = writeln!(out, "{} {} {}", p[0] + 0.0, p[1] + 0.0, u8::from(mesh.is_boundary(v)));
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(ln, format!("bad header '{header}': {e}")))?;
    let [nv, nt] = counts[..] else {
        return Err(parse_err(ln, format!("header must be 'N_h N_T', got '{header}'")));
    };

    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {nv} vertex lines")))?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(ln, format!("vertex line needs 'x y b', got '{l}'")));
        }
        let x: f64 = fields[0].parse().map_err(|e| parse_err(ln, format!("x: {e}")))?;
        let y: f64 = fields[1].parse().map_err(|e| parse_err(ln, format!("y: {e}")))?;
        let b = match fields[2] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(ln, format!("boundary flag must be 0 or 1, got '{other}'"))),
        };
        vertices.push([x, y]);
        flags.push(b);
    }

    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {nt} triangle lines")))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(ln, format!("bad triangle '{l}': {e}")))?;
        let [i, j, k] = ids[..] else {
            return Err(parse_err(ln, format!("triangle line needs 'i j k', got '{l}'")));
        };
        triangles.push([i, j, k]);
    }
    if let Some((ln, l)) = lines.next() {
        return Err(parse_err(ln, format!("unexpected trailing content '{l}'")));
    }

    let mesh = TriMesh::new(vertices, triangles)?;
    if let Some(v) = (0..nv).find(|&v| mesh.is_boundary(v) != flags[v]) {
        return Err(Error::mesh(
            "boundary flags",
            format!(
                "vertex {v} stored as {} but connectivity says {}",
                u8::from(flags[v]),
                u8::from(mesh.is_boundary(v))
            ),
        ));
    }
    Ok(mesh)
}
