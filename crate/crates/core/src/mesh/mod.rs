//! Conforming triangulations of convex planar domains.

mod delaunay;
mod domain;
mod generate;
mod io;

use std::collections::HashMap;

pub use delaunay::triangulate;
pub use domain::DomainSpec;
pub use generate::generate_mesh;
pub use io::{read_mesh, write_mesh};

use crate::error::{Error, Result};

/// Conforming triangulation with boundary flags and interior numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
    h_actual: f64,
}

/// Triangles incident to each vertex and the area of that patch.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPatch {
    pub patch_triangles: Vec<Vec<usize>>,
    pub patch_area: Vec<f64>,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl TriMesh {
    /// Validates connectivity and builds a mesh. Clockwise triangles are
    /// reoriented; degenerate or non-conforming input is rejected.
    pub fn new(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if triangles.is_empty() {
            return Err(Error::mesh("non-empty", "mesh has no triangles"));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::mesh(
                    "vertex index",
                    format!("triangle {t} references a vertex outside 0..{n}"),
                ));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::mesh("positive area", format!("triangle {t} repeats a vertex")));
            }
            if vertices[tri[0]]
                .iter()
                .chain(&vertices[tri[1]])
                .chain(&vertices[tri[2]])
                .any(|x| !x.is_finite())
            {
                return Err(Error::mesh("finite coordinates", format!("triangle {t}")));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area = signed_area(a, b, c);
            if area < 0.0 {
                tri.swap(1, 2);
            } else if area == 0.0 {
                return Err(Error::mesh("positive area", format!("triangle {t} is degenerate")));
            }
        }

        // directed edge -> owning triangle
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let e = (tri[i], tri[(i + 1) % 3]);
                if let Some(other) = directed.insert(e, t) {
                    return Err(Error::mesh(
                        "conforming",
                        format!("triangles {other} and {t} overlap along edge {e:?}"),
                    ));
                }
            }
        }

        let mut used = vec![false; n];
        for tri in &triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::mesh("conforming", format!("vertex {v} belongs to no triangle")));
        }

        // an edge is on the boundary iff its reverse is not present
        let mut boundary = vec![false; n];
        let mut next_on_boundary: HashMap<usize, usize> = HashMap::new();
        let mut boundary_edges = 0usize;
        let mut interior_edges = 0usize;
        for &(a, b) in directed.keys() {
            if directed.contains_key(&(b, a)) {
                interior_edges += 1;
                continue;
            }
            boundary_edges += 1;
            boundary[a] = true;
            boundary[b] = true;
            if next_on_boundary.insert(a, b).is_some() {
                return Err(Error::mesh(
                    "conforming",
                    format!("vertex {a} starts more than one boundary edge (hanging or pinched vertex)"),
                ));
            }
        }
        let edges = boundary_edges + interior_edges / 2;

        // boundary edges must form a single closed loop
        let start = *next_on_boundary
            .keys()
            .min()
            .ok_or_else(|| Error::mesh("conforming", "no boundary edges"))?;
        let mut loop_pts = vec![vertices[start]];
        let mut cur = next_on_boundary[&start];
        let mut steps = 1usize;
        while cur != start {
            loop_pts.push(vertices[cur]);
            cur = *next_on_boundary
                .get(&cur)
                .ok_or_else(|| Error::mesh("conforming", format!("boundary loop broken at vertex {cur}")))?;
            steps += 1;
            if steps > boundary_edges {
                break;
            }
        }
        if steps != boundary_edges {
            return Err(Error::mesh(
                "conforming",
                format!("boundary splits into several loops ({steps} of {boundary_edges} edges in the first)"),
            ));
        }
        if n + triangles.len() != edges + 1 {
            return Err(Error::mesh(
                "conforming",
                format!(
                    "Euler characteristic V - E + F = {} (expected 1)",
                    n as i64 - edges as i64 + triangles.len() as i64
                ),
            ));
        }
        let covered: f64 = triangles
            .iter()
            .map(|t| signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
            .sum();
        let enclosed = domain::shoelace(&loop_pts);
        if (covered - enclosed).abs() > 1e-9 * enclosed.abs().max(1e-300) {
            return Err(Error::mesh(
                "conforming",
                format!("triangles cover area {covered} but boundary encloses {enclosed}"),
            ));
        }

        let mut interior_index = vec![None; n];
        let mut interior_vertices = Vec::new();
        for v in 0..n {
            if !boundary[v] {
                interior_index[v] = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }
        let h_actual = triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .map(|(a, b)| dist(vertices[a], vertices[b]))
            .fold(0.0, f64::max);

        Ok(TriMesh {
            vertices,
            triangles,
            boundary,
            interior_index,
            interior_vertices,
            h_actual,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Zero-based position of `v` among the interior vertices.
    pub fn interior_index(&self, v: usize) -> Option<usize> {
        self.interior_index[v]
    }

    /// Interior vertex ids in numbering order.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Longest edge length.
    pub fn h(&self) -> f64 {
        self.h_actual
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        signed_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_degrees(&self) -> f64 {
        let mut min = f64::INFINITY;
        for tri in &self.triangles {
            let p = tri.map(|v| self.vertices[v]);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let w = [c[0] - a[0], c[1] - a[1]];
                let ang = (u[0] * w[1] - u[1] * w[0]).atan2(u[0] * w[0] + u[1] * w[1]);
                min = min.min(ang.to_degrees());
            }
        }
        min
    }

    /// Sorted, deduplicated vertex neighbours (vertices sharing an edge).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertices.len()];
        for tri in &self.triangles {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        nb[tri[i]].push(tri[j]);
                    }
                }
            }
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        nb
    }
}

/// Incident triangles and patch areas `|w_l|` per vertex.
pub fn compute_patches(mesh: &TriMesh) -> VertexPatch {
    let n = mesh.num_vertices();
    let mut patch_triangles = vec![Vec::new(); n];
    let mut patch_area = vec![0.0; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        for &v in tri {
            patch_triangles[v].push(t);
            patch_area[v] += area;
        }
    }
    VertexPatch {
        patch_triangles,
        patch_area,
    }
}
