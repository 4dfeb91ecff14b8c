#![allow(dead_code)]

use ma_eigen::fem::{P1Space, ScalarField, Space};
use ma_eigen::mesh::{triangulate, TriMesh};

/// Nodal interpolant, forced to zero on the boundary.
pub fn interpolate_zero_trace(space: &P1Space, f: impl Fn(f64, f64) -> f64) -> ScalarField {
    let mesh = space.mesh();
    let values = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| if mesh.is_boundary(v) { 0.0 } else { f(p[0], p[1]) })
        .collect();
    ScalarField::new(values, Space::ZeroTrace)
}

pub fn interpolate(space: &P1Space, f: impl Fn(f64, f64) -> f64) -> ScalarField {
    ScalarField::new(
        space.mesh().vertices().iter().map(|p| f(p[0], p[1])).collect(),
        Space::Full,
    )
}

/// Small unstructured mesh: `k` hull points on the unit circle at the
/// given angles plus interior points, Delaunay-triangulated.
pub fn random_mesh(angles: &[f64], interior: &[[f64; 2]]) -> Option<TriMesh> {
    let mut pts: Vec<[f64; 2]> = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
    for p in interior {
        if pts.iter().all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) > 0.05) {
            pts.push(*p);
        }
    }
    let tris = triangulate(&pts);
    TriMesh::new(pts, tris).ok()
}

/// Hat-function gradients from the 3x3 system `[1 x y] c = e_a`, solved by
/// Cramer's rule.
pub fn hat_gradients(p: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let m = [
        [1.0, p[0][0], p[0][1]],
        [1.0, p[1][0], p[1][1]],
        [1.0, p[2][0], p[2][1]],
    ];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    let mut out = [[0.0; 2]; 3];
    for (a, g) in out.iter_mut().enumerate() {
        let rhs: [f64; 3] = std::array::from_fn(|i| if i == a { 1.0 } else { 0.0 });
        for (k, gk) in [1usize, 2].into_iter().zip(g.iter_mut()) {
            let mut mk = m;
            for i in 0..3 {
                mk[i][k] = rhs[i];
            }
            *gk = det3(&mk) / d;
        }
    }
    out
}

/// Dense `K_lm = sum_T |T| grad phi_l . grad phi_m` over interior vertices.
pub fn dense_laplacian(mesh: &TriMesh) -> Vec<Vec<f64>> {
    let n = mesh.num_interior();
    let mut k = vec![vec![0.0; n]; n];
    for tri in mesh.triangles() {
        let p = tri.map(|v| mesh.vertices()[v]);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
        let g = hat_gradients(p);
        for a in 0..3 {
            for b in 0..3 {
                if let (Some(i), Some(j)) = (mesh.interior_index(tri[a]), mesh.interior_index(tri[b])) {
                    k[i][j] += area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
    }
    k
}
