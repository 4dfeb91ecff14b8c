//! Deterministic mesh generator: boundary sampling, lattice seeding, Delaunay
//! triangulation and a few rounds of Laplacian smoothing.

use std::collections::BTreeSet;

use super::delaunay::triangulate;
use super::domain::{point_segment_distance, DomainSpec};
use super::TriMesh;
use crate::error::{Error, Result};

/// Boundary samples are spaced at this fraction of `h`.
const BOUNDARY_SPACING: f64 = 0.9;
/// Spacing of the triangular seed lattice, as a fraction of `h`.
const LATTICE_SPACING: f64 = 0.9;
/// Seeds closer than this (times `h`) to the boundary are dropped.
const BOUNDARY_CLEARANCE: f64 = 0.6;
const SMOOTHING_ROUNDS: usize = 6;
const MAX_SPLIT_ROUNDS: usize = 8;
const SMOOTHED_SPLIT_ROUNDS: usize = 1;
/// Generator contract: longest edge at most this multiple of `h`.
pub const MAX_EDGE_RATIO: f64 = 1.05;

/// Builds a conforming triangulation of `spec` whose longest edge is close
/// to (and at most 1.05 times) `h`. The output depends only on `(spec, h)`.
pub fn generate_mesh(spec: &DomainSpec, h: f64) -> Result<TriMesh> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("mesh size h must be positive, got {h}")));
    }
    if let DomainSpec::Polygon(v) = spec {
        DomainSpec::polygon(v.clone())?;
    }
    let boundary = spec.boundary_points(BOUNDARY_SPACING * h);
    if boundary.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "h = {h} is too coarse: boundary has only {} segments",
            boundary.len()
        )));
    }
    let nb = boundary.len();

    let mut points = boundary.clone();
    points.extend(lattice_seeds(&boundary, h));

    let mut tris = triangulate_inside(spec, &points);
    for _ in 0..SMOOTHING_ROUNDS {
        smooth(&mut points, &tris, nb);
        tris = triangulate_inside(spec, &points);
    }

    // split, then re-smooth; the last rounds split without smoothing so the
    // edge bound holds on exit
    for round in 0..MAX_SPLIT_ROUNDS {
        let long = long_edge_midpoints(&points, &tris, h);
        if long.is_empty() {
            break;
        }
        points.extend(long);
        tris = triangulate_inside(spec, &points);
        if round < SMOOTHED_SPLIT_ROUNDS {
            for _ in 0..SMOOTHING_ROUNDS {
                smooth(&mut points, &tris, nb);
                tris = triangulate_inside(spec, &points);
            }
        }
    }

    let mesh = TriMesh::new(points, tris)?;
    if mesh.h() > MAX_EDGE_RATIO * h {
        return Err(Error::mesh(
            "edge length",
            format!(
                "longest edge {} exceeds {MAX_EDGE_RATIO} h = {}",
                mesh.h(),
                MAX_EDGE_RATIO * h
            ),
        ));
    }
    let boundary_count = mesh.boundary_flags().iter().filter(|&&b| b).count();
    if boundary_count != nb || mesh.boundary_flags()[..nb].iter().any(|b| !b) {
        return Err(Error::mesh(
            "boundary",
            "triangulation boundary does not match the sampled domain boundary",
        ));
    }
    Ok(mesh)
}

fn lattice_seeds(boundary: &[[f64; 2]], h: f64) -> Vec<[f64; 2]> {
    let s = LATTICE_SPACING * h;
    let row = s * 3f64.sqrt() / 2.0;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in boundary {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let nx = ((hi[0] - lo[0]) / s).ceil() as i64 + 1;
    let ny = ((hi[1] - lo[1]) / row).ceil() as i64 + 1;
    let n = boundary.len();
    let clearance = BOUNDARY_CLEARANCE * h;

    let mut seeds = Vec::new();
    for j in -ny..=ny {
        let y = c[1] + j as f64 * row;
        let shift = if j.rem_euclid(2) == 1 { 0.5 * s } else { 0.0 };
        for i in -nx..=nx {
            let p = [c[0] + i as f64 * s + shift, y];
            // convex boundary polygon: inside iff left of every edge
            let inside = (0..n).all(|k| {
                let a = boundary[k];
                let b = boundary[(k + 1) % n];
                (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > 0.0
            });
            if !inside {
                continue;
            }
            let d = (0..n)
                .map(|k| point_segment_distance(p, boundary[k], boundary[(k + 1) % n]))
                .fold(f64::INFINITY, f64::min);
            if d > clearance {
                seeds.push(p);
            }
        }
    }
    seeds
}

fn triangulate_inside(spec: &DomainSpec, points: &[[f64; 2]]) -> Vec<[usize; 3]> {
    triangulate(points)
        .into_iter()
        .filter(|t| {
            let [a, b, c] = t.map(|v| points[v]);
            spec.contains([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0])
        })
        .collect()
}

/// One Jacobi sweep moving every non-boundary point to the mean of its neighbours.
fn smooth(points: &mut [[f64; 2]], tris: &[[usize; 3]], fixed: usize) {
    let n = points.len();
    let mut nb: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in tris {
        for i in 0..3 {
            nb[t[i]].push(t[(i + 1) % 3]);
            nb[t[i]].push(t[(i + 2) % 3]);
        }
    }
    for list in &mut nb {
        list.sort_unstable();
        list.dedup();
    }
    let old = points.to_vec();
    for v in fixed..n {
        if nb[v].is_empty() {
            continue;
        }
        let k = nb[v].len() as f64;
        let (sx, sy) = nb[v]
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &w| (sx + old[w][0], sy + old[w][1]));
        points[v] = [sx / k, sy / k];
    }
}

/// Midpoints of edges longer than `h` that are the longest edge of a triangle.
fn long_edge_midpoints(points: &[[f64; 2]], tris: &[[usize; 3]], h: f64) -> Vec<[f64; 2]> {
    let len = |a: usize, b: usize| (points[a][0] - points[b][0]).hypot(points[a][1] - points[b][1]);
    let mut edges = BTreeSet::new();
    for t in tris {
        let (mut best, mut best_len) = ((t[0], t[1]), len(t[0], t[1]));
        for i in 1..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            if len(a, b) > best_len {
                best = (a, b);
                best_len = len(a, b);
            }
        }
        if best_len > h {
            edges.insert((best.0.min(best.1), best.0.max(best.1)));
        }
    }
    edges
        .into_iter()
        .map(|(a, b)| [0.5 * (points[a][0] + points[b][0]), 0.5 * (points[a][1] + points[b][1])])
        .collect()
}
