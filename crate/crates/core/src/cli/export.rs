//! Text, CSV and VTK writers for solver output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::solver::SolveReport;

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Flat `key=value` report; histories are comma-separated.
pub fn report_text(report: &SolveReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lambda_final={}", report.lambda_final);
    let _ = writeln!(s, "min_u={}", report.min_u);
    let _ = writeln!(s, "max_u={}", report.max_u);
    let _ = writeln!(s, "iterations={}", report.iterations);
    let _ = writeln!(s, "converged={}", report.converged);
    let _ = writeln!(s, "wall_time={}", report.wall_time);
    let _ = writeln!(s, "lambda0={}", report.lambda0);
    let _ = writeln!(s, "gamma={}", report.gamma);
    let _ = writeln!(s, "eps={}", report.eps);
    let _ = writeln!(s, "h={}", report.h);
    let _ = writeln!(s, "num_vertices={}", report.num_vertices);
    let _ = writeln!(s, "num_triangles={}", report.num_triangles);
    let _ = writeln!(s, "lambda_history={}", join(&report.lambda_history));
    let _ = writeln!(s, "residual_history={}", join(&report.residual_history));
    s
}

pub fn write_report_text(report: &SolveReport, path: &Path) -> Result<()> {
    write(path, report_text(report))
}

pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
    write(path, text + "\n")
}

/// Nodal values as `x,y,u`.
pub fn write_field_csv(mesh: &TriMesh, u: &[f64], path: &Path) -> Result<()> {
    let mut s = String::from("x,y,u\n");
    for (p, v) in mesh.vertices().iter().zip(u) {
        let _ = writeln!(s, "{},{},{}", p[0], p[1], v);
    }
    write(path, s)
}

/// Legacy ASCII unstructured grid with point scalar `u`.
pub fn write_vtk(mesh: &TriMesh, u: &[f64], path: &Path) -> Result<()> {
    let n = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# vtk DataFile Version 3.0\nma-eigen solution\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(s, "POINTS {n} double");
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {n}\nSCALARS u double 1\nLOOKUP_TABLE default");
    for v in u {
        let _ = writeln!(s, "{v}");
    }
    write(path, s)
}

/// Piecewise-linear trace of `u` along `x2 = 0`, sorted by `x1` with
/// duplicate crossings (shared edges and vertices) merged.
pub fn cross_section(mesh: &TriMesh, u: &[f64]) -> Vec<(f64, f64)> {
    const MERGE: f64 = 1e-9;
    let verts = mesh.vertices();
    let mut pts = Vec::new();
    for tri in mesh.triangles() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let (ya, yb) = (verts[a][1], verts[b][1]);
            if ya == 0.0 {
                pts.push((verts[a][0], u[a]));
            }
            if (ya < 0.0 && yb > 0.0) || (ya > 0.0 && yb < 0.0) {
                let s = ya / (ya - yb);
                let x = verts[a][0] + s * (verts[b][0] - verts[a][0]);
                pts.push((x, u[a] + s * (u[b] - u[a])));
            }
        }
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    pts.dedup_by(|q, p| (q.0 - p.0).abs() <= MERGE);
    pts
}

pub fn write_cross_section_csv(rows: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut s = String::from("x,u\n");
    for (x, v) in rows {
        let _ = writeln!(s, "{x},{v}");
    }
    write(path, s)
}
