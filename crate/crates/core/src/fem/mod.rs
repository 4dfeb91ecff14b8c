//! Piecewise-linear finite elements: fields, lumped inner product, stiffness
//! assembly and SPD solves.

mod solve;
mod sparse;

use std::sync::Arc;

pub use solve::{solve_spd, LinearSolver, SpdFactor, DIRECT_TOLERANCE};
pub use sparse::{Dofs, SparsePattern, SparseSpdMatrix};

use crate::error::{Error, Result};
use crate::mesh::{compute_patches, TriMesh, VertexPatch};
use crate::psd::SymMat2;

/// Function space of a scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// All of V_h.
    Full,
    /// Fields vanishing on the boundary.
    ZeroTrace,
}

/// Nodal values of a P1 function, one per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    space: Space,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, space: Space) -> Self {
        ScalarField { values, space }
    }

    pub fn zeros(n: usize, space: Space) -> Self {
        ScalarField::new(vec![0.0; n], space)
    }

    /// Lifts interior unknowns to a zero-trace field.
    pub fn from_interior(mesh: &TriMesh, interior: &[f64]) -> Self {
        let mut values = vec![0.0; mesh.num_vertices()];
        for (k, &v) in mesh.interior_vertices().iter().enumerate() {
            values[v] = interior[k];
        }
        ScalarField::new(values, Space::ZeroTrace)
    }

    /// Nodal values at interior vertices, in interior numbering.
    pub fn interior_values(&self, mesh: &TriMesh) -> Vec<f64> {
        mesh.interior_vertices().iter().map(|&v| self.values[v]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, s: f64) -> Self {
        ScalarField::new(self.values.iter().map(|v| s * v).collect(), self.space)
    }
}

/// One symmetric 2x2 tensor per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    values: Vec<SymMat2>,
}

impl SymTensorField {
    pub fn new(values: Vec<SymMat2>) -> Self {
        SymTensorField { values }
    }

    pub fn constant(n: usize, m: SymMat2) -> Self {
        SymTensorField::new(vec![m; n])
    }

    pub fn values(&self) -> &[SymMat2] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(&SymMat2) -> SymMat2) -> Self {
        SymTensorField::new(self.values.iter().map(f).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(SymMat2::is_finite)
    }
}

/// Constant gradients of the three hat functions on a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl TriGeometry {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        let grads = std::array::from_fn(|i| {
            let a = p[(i + 1) % 3];
            let b = p[(i + 2) % 3];
            [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)]
        });
        TriGeometry { area, grads }
    }

    /// Gradient of the P1 interpolant with nodal values `u`.
    pub fn gradient(&self, u: [f64; 3]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for i in 0..3 {
            g[0] += u[i] * self.grads[i][0];
            g[1] += u[i] * self.grads[i][1];
        }
        g
    }
}

/// Mesh plus everything reused across assemblies: patches, element
/// geometry, lumped weights and the two sparsity patterns.
#[derive(Debug)]
pub struct P1Space {
    mesh: TriMesh,
    patches: VertexPatch,
    geometry: Vec<TriGeometry>,
    weights: Vec<f64>,
    interior_pattern: Arc<SparsePattern>,
    full_pattern: Arc<SparsePattern>,
}

impl P1Space {
    pub fn new(mesh: TriMesh) -> Self {
        let patches = compute_patches(&mesh);
        let geometry = mesh
            .triangles()
            .iter()
            .map(|t| TriGeometry::new(t.map(|v| mesh.vertices()[v])))
            .collect();
        let weights = lumped_mass(&patches);
        let interior_pattern = Arc::new(SparsePattern::new(&mesh, Dofs::Interior));
        let full_pattern = Arc::new(SparsePattern::new(&mesh, Dofs::All));
        P1Space {
            mesh,
            patches,
            geometry,
            weights,
            interior_pattern,
            full_pattern,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn patches(&self) -> &VertexPatch {
        &self.patches
    }

    pub fn geometry(&self) -> &[TriGeometry] {
        &self.geometry
    }

    /// Lumped mass weights `|w_l| / 3` for every vertex.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interior_weights(&self) -> Vec<f64> {
        self.mesh.interior_vertices().iter().map(|&v| self.weights[v]).collect()
    }

    pub fn pattern(&self, dofs: Dofs) -> Arc<SparsePattern> {
        match dofs {
            Dofs::Interior => self.interior_pattern.clone(),
            Dofs::All => self.full_pattern.clone(),
        }
    }

    /// Assembles `sum_T w_T * (M_T grad phi_m) . grad phi_l` with per-triangle
    /// scalar weight and tensor supplied by `coeff`.
    pub fn assemble(&self, dofs: Dofs, coeff: impl Fn(usize) -> (f64, SymMat2)) -> SparseSpdMatrix {
        SparseSpdMatrix::assemble(self.pattern(dofs), |t| {
            let g = &self.geometry[t];
            let (w, m) = coeff(t);
            std::array::from_fn(|i| std::array::from_fn(|j| w * m.bilinear(g.grads[j], g.grads[i])))
        })
    }

    /// `(u, v)_h` over all vertices.
    pub fn inner_product(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        inner_product_h(u, v, &self.weights)
    }

    pub fn norm(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.inner_product(u, u)?.sqrt())
    }
}

/// Lumped mass weights `m_l = |w_l| / 3`.
pub fn lumped_mass(patches: &VertexPatch) -> Vec<f64> {
    patches.patch_area.iter().map(|a| a / 3.0).collect()
}

/// Discrete inner product `sum_l m_l u_l v_l`.
pub fn inner_product_h(u: &ScalarField, v: &ScalarField, weights: &[f64]) -> Result<f64> {
    let n = weights.len();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(weights
        .iter()
        .zip(u.values())
        .zip(v.values())
        .map(|((m, a), b)| m * a * b)
        .sum())
}

/// Interior stiffness matrix of `-div(M grad u)` with `M` given per vertex and
/// averaged over each triangle.
pub fn assemble_stiffness(space: &P1Space, coeff: &SymTensorField) -> Result<SparseSpdMatrix> {
    assemble_stiffness_on(space, coeff, Dofs::Interior)
}

pub fn assemble_stiffness_on(space: &P1Space, coeff: &SymTensorField, dofs: Dofs) -> Result<SparseSpdMatrix> {
    let mesh = space.mesh();
    if coeff.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: coeff.len(),
        });
    }
    let averaged: Vec<SymMat2> = mesh
        .triangles()
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|v| coeff.values()[v]);
            (1.0 / 3.0) * (a + b + c)
        })
        .collect();
    for (t, m) in averaged.iter().enumerate() {
        let e = m.min_eigenvalue();
        if !(e >= -1e-12) {
            return Err(Error::IndefiniteCoefficient {
                triangle: t,
                eigenvalue: e,
            });
        }
    }
    Ok(space.assemble(dofs, |t| (space.geometry[t].area, averaged[t])))
}

/// Laplacian stiffness on interior vertices.
pub fn laplacian(space: &P1Space) -> SparseSpdMatrix {
    space.assemble(Dofs::Interior, |t| (space.geometry[t].area, SymMat2::IDENTITY))
}

/// Smallest eigenvalue of `K x = lambda M x` (Dirichlet Laplacian, lumped
/// mass) by inverse power iteration from the all-ones vector.
pub fn smallest_laplacian_eigenvalue(space: &P1Space, tol: f64) -> Result<f64> {
    const MAX_ITER: usize = 500;
    let n = space.mesh().num_interior();
    if n == 0 {
        return Err(Error::NoInteriorVertices);
    }
    let k = laplacian(space);
    let factor = SpdFactor::new(&k, LinearSolver::Cholesky)?;
    let m = space.interior_weights();
    let m_norm = |x: &[f64]| x.iter().zip(&m).map(|(a, w)| w * a * a).sum::<f64>().sqrt();

    let mut x = vec![1.0; n];
    let s = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut lambda = k.quadratic_form(&x);
    for _ in 0..MAX_ITER {
        let mx: Vec<f64> = x.iter().zip(&m).map(|(a, w)| a * w).collect();
        let mut y = factor.solve(&mx)?;
        let s = m_norm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let next = k.quadratic_form(&y);
        x = y;
        let done = (next - lambda).abs() < tol * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    Ok(lambda)
}

/// Discrete solution of `lap u = 2 eta` with zero boundary values.
pub fn poisson_initial(space: &P1Space, eta: f64) -> Result<ScalarField> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    if space.mesh().num_interior() == 0 {
        return Err(Error::NoInteriorVertices);
    }
    let rhs: Vec<f64> = space.interior_weights().iter().map(|m| -2.0 * eta * m).collect();
    let u = solve_spd(&laplacian(space), &rhs)?;
    Ok(ScalarField::from_interior(space.mesh(), &u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, DomainSpec};

    fn square() -> TriMesh {
        TriMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    /// 3x3 grid on the unit square: one interior vertex (index 4).
    fn grid3() -> TriMesh {
        let mut v = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                v.push([0.5 * i as f64, 0.5 * j as f64]);
            }
        }
        let mut t = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                let a = 3 * j + i;
                t.push([a, a + 1, a + 4]);
                t.push([a, a + 4, a + 3]);
            }
        }
        TriMesh::new(v, t).unwrap()
    }

    /// Brute force: explicit gradients from the 2x2 inverse Jacobian.
    fn dense_laplacian_all(mesh: &TriMesh) -> Vec<Vec<f64>> {
        let n = mesh.num_vertices();
        let mut k = vec![vec![0.0; n]; n];
        for tri in mesh.triangles() {
            let p = tri.map(|v| mesh.vertices()[v]);
            let j = [
                [p[1][0] - p[0][0], p[2][0] - p[0][0]],
                [p[1][1] - p[0][1], p[2][1] - p[0][1]],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
            let ref_grads = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let g: Vec<[f64; 2]> = ref_grads
                .iter()
                .map(|r| {
                    [
                        inv_t[0][0] * r[0] + inv_t[0][1] * r[1],
                        inv_t[1][0] * r[0] + inv_t[1][1] * r[1],
                    ]
                })
                .collect();
            let area = det.abs() / 2.0;
            for a in 0..3 {
                for b in 0..3 {
                    k[tri[a]][tri[b]] += area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
        k
    }

    #[test]
    fn square_lumped_weights() {
        let sp = P1Space::new(square());
        assert_eq!(sp.weights(), &[1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0]);
    }

    #[test]
    fn weights_sum_to_area() {
        let sp = P1Space::new(generate_mesh(&DomainSpec::Disk, 0.2).unwrap());
        let s: f64 = sp.weights().iter().sum();
        assert!((s - sp.mesh().area()).abs() < 1e-13);
    }

    #[test]
    fn inner_product_basics() {
        let sp = P1Space::new(square());
        let one = ScalarField::new(vec![1.0; 4], Space::Full);
        assert!((sp.inner_product(&one, &one).unwrap() - 1.0).abs() < 1e-15);
        let bad = ScalarField::new(vec![1.0; 3], Space::Full);
        assert!(matches!(
            sp.inner_product(&one, &bad),
            Err(Error::DimensionMismatch { .. })
        ));

        let disk = P1Space::new(generate_mesh(&DomainSpec::Disk, 0.2).unwrap());
        let two = ScalarField::new(vec![2.0; disk.mesh().num_vertices()], Space::Full);
        let ip = disk.inner_product(&two, &two).unwrap();
        assert!((ip - 4.0 * disk.mesh().area()).abs() < 1e-12);
    }

    #[test]
    fn square_stiffness_by_hand() {
        let sp = P1Space::new(square());
        let k = sp.assemble(Dofs::All, |t| (sp.geometry()[t].area, SymMat2::IDENTITY));
        // diagonal vertices 0, 2 are not connected by any off-diagonal weight
        // except through the shared diagonal edge (cot 90 deg = 0)
        let expected = [
            [1.0, -0.5, 0.0, -0.5],
            [-0.5, 1.0, -0.5, 0.0],
            [0.0, -0.5, 1.0, -0.5],
            [-0.5, 0.0, -0.5, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((k.get(i, j) - expected[i][j]).abs() < 1e-15, "({i},{j})");
            }
            let row: f64 = (0..4).map(|j| k.get(i, j)).sum();
            assert!(row.abs() < 1e-15);
        }
    }

    #[test]
    fn grid_stiffness_matches_dense_oracle() {
        for mesh in [grid3(), generate_mesh(&DomainSpec::unit_square(), 0.3).unwrap()] {
            assert!(mesh.num_vertices() <= 50);
            let sp = P1Space::new(mesh);
            let id = SymTensorField::constant(sp.mesh().num_vertices(), SymMat2::IDENTITY);
            let k = assemble_stiffness_on(&sp, &id, Dofs::All).unwrap();
            let dense = dense_laplacian_all(sp.mesh());
            let n = sp.mesh().num_vertices();
            for i in 0..n {
                for j in 0..n {
                    assert!((k.get(i, j) - dense[i][j]).abs() < 1e-12);
                }
            }
            assert!(k.max_asymmetry() < 1e-15);
        }
    }

    #[test]
    fn stiffness_is_linear_in_coefficient() {
        let sp = P1Space::new(generate_mesh(&DomainSpec::Disk, 0.25).unwrap());
        let n = sp.mesh().num_vertices();
        let k1 = assemble_stiffness(&sp, &SymTensorField::constant(n, SymMat2::IDENTITY)).unwrap();
        let k2 = assemble_stiffness(&sp, &SymTensorField::constant(n, SymMat2::diag(2.0, 2.0))).unwrap();
        for (a, b) in k1.values().iter().zip(k2.values()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn indefinite_coefficient_rejected() {
        let sp = P1Space::new(grid3());
        let c = SymTensorField::constant(9, SymMat2::diag(1.0, -0.5));
        assert!(matches!(
            assemble_stiffness(&sp, &c),
            Err(Error::IndefiniteCoefficient { .. })
        ));
    }

    #[test]
    fn sparsity_follows_adjacency() {
        let sp = P1Space::new(generate_mesh(&DomainSpec::Disk, 0.25).unwrap());
        let k = assemble_stiffness_on(
            &sp,
            &SymTensorField::constant(sp.mesh().num_vertices(), SymMat2::new(2.0, 0.3, 1.0)),
            Dofs::All,
        )
        .unwrap();
        let nb = sp.mesh().vertex_neighbors();
        let p = k.pattern();
        for r in 0..k.dim() {
            for &c in &p.col_idx()[p.row_ptr()[r]..p.row_ptr()[r + 1]] {
                assert!(c == r || nb[r].binary_search(&c).is_ok());
            }
        }
    }

    #[test]
    fn smallest_eigenvalue_disk_and_square() {
        let j01 = 2.404_825_557_695_773_f64;
        let disk = P1Space::new(generate_mesh(&DomainSpec::Disk, 1.0 / 40.0).unwrap());
        let l = smallest_laplacian_eigenvalue(&disk, 1e-8).unwrap();
        assert!((l / (j01 * j01) - 1.0).abs() < 0.02, "{l}");

        let exact = 2.0 * std::f64::consts::PI.powi(2);
        let coarse = P1Space::new(generate_mesh(&DomainSpec::unit_square(), 1.0 / 10.0).unwrap());
        let fine = P1Space::new(generate_mesh(&DomainSpec::unit_square(), 1.0 / 40.0).unwrap());
        let lc = smallest_laplacian_eigenvalue(&coarse, 1e-8).unwrap();
        let lf = smallest_laplacian_eigenvalue(&fine, 1e-8).unwrap();
        assert!((lf / exact - 1.0).abs() < 0.02, "{lf}");
        assert!((lf - exact).abs() < (lc - exact).abs());
    }

    #[test]
    fn poisson_initial_disk_centre() {
        let sp = P1Space::new(generate_mesh(&DomainSpec::Disk, 1.0 / 20.0).unwrap());
        let u = poisson_initial(&sp, 1.0).unwrap();
        let centre = sp
            .mesh()
            .vertices()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1[0].hypot(a.1[1]).total_cmp(&b.1[0].hypot(b.1[1])))
            .unwrap();
        let r2 = centre.1[0].powi(2) + centre.1[1].powi(2);
        assert!((u.values()[centre.0] - (r2 - 1.0) / 2.0).abs() < 0.01);
        for v in 0..sp.mesh().num_vertices() {
            if sp.mesh().is_boundary(v) {
                assert_eq!(u.values()[v], 0.0);
            } else {
                assert!(u.values()[v] < 0.0);
            }
        }
        let u2 = poisson_initial(&sp, 2.0).unwrap();
        for (a, b) in u.values().iter().zip(u2.values()) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, piv);
            b.swap(k, piv);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn spd_solve_matches_dense_elimination() {
        let sp = P1Space::new(generate_mesh(&DomainSpec::unit_square(), 0.4).unwrap());
        let n = sp.mesh().num_vertices();
        let mut k = assemble_stiffness_on(
            &sp,
            &SymTensorField::constant(n, SymMat2::new(1.5, 0.2, 0.7)),
            Dofs::All,
        )
        .unwrap();
        k.add_diagonal(sp.weights());
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let oracle = dense_solve(k.to_dense(), b.clone());
        for solver in [LinearSolver::Cholesky, LinearSolver::pcg()] {
            let x = SpdFactor::new(&k, solver).unwrap().solve(&b).unwrap();
            for (a, o) in x.iter().zip(&oracle) {
                assert!((a - o).abs() < 1e-10 * o.abs().max(1.0));
            }
        }
        let zero = solve_spd(&k, &vec![0.0; n]).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_solve_and_pivot_error() {
        let sp = P1Space::new(grid3());
        let mut m = SparseSpdMatrix::zeros(sp.pattern(Dofs::All));
        m.add_diagonal(&[1.0; 9]);
        let b: Vec<f64> = (0..9).map(|i| i as f64 - 3.0).collect();
        assert_eq!(solve_spd(&m, &b).unwrap(), b);

        let mut bad = SparseSpdMatrix::zeros(sp.pattern(Dofs::All));
        let mut d = [1.0; 9];
        d[4] = -1.0;
        bad.add_diagonal(&d);
        assert!(matches!(solve_spd(&bad, &b), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(solve_spd(&m, &[1.0; 3]), Err(Error::DimensionMismatch { .. })));
    }
}
