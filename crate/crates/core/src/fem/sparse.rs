//! Compressed-row symmetric matrices on the vertex adjacency pattern.

use std::sync::{Arc, OnceLock};

use faer::sparse::linalg::solvers::SymbolicLlt;

use crate::mesh::TriMesh;

/// Which vertices carry unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dofs {
    /// Interior vertices only (homogeneous Dirichlet data).
    Interior,
    /// Every vertex (natural boundary condition).
    All,
}

const ABSENT: usize = usize::MAX;

/// Row-compressed sparsity pattern with full (both triangles) storage and
/// sorted column indices.
#[derive(Debug)]
pub struct SparsePattern {
    dofs: Dofs,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Per triangle, position in `col_idx` of local entry `(i, j)` at `3 i + j`.
    tri_slots: Vec<[usize; 9]>,
    /// Shared symbolic Cholesky analysis, computed on first factorization.
    pub(crate) symbolic: OnceLock<SymbolicLlt<usize>>,
}

impl SparsePattern {
    pub fn new(mesh: &TriMesh, dofs: Dofs) -> Self {
        let dof_of = |v: usize| match dofs {
            Dofs::All => Some(v),
            Dofs::Interior => mesh.interior_index(v),
        };
        let n = match dofs {
            Dofs::All => mesh.num_vertices(),
            Dofs::Interior => mesh.num_interior(),
        };
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for tri in mesh.triangles() {
            for &a in tri {
                let Some(r) = dof_of(a) else { continue };
                for &b in tri {
                    if let Some(c) = dof_of(b) {
                        cols[r].push(c);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for list in &mut cols {
            list.sort_unstable();
            list.dedup();
            col_idx.extend_from_slice(list);
            row_ptr.push(col_idx.len());
        }
        let slot = |r: usize, c: usize| -> usize {
            let row = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            row_ptr[r] + row.binary_search(&c).expect("entry outside pattern")
        };
        let tri_slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [ABSENT; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        if let (Some(r), Some(c)) = (dof_of(tri[i]), dof_of(tri[j])) {
                            s[3 * i + j] = slot(r, c);
                        }
                    }
                }
                s
            })
            .collect();
        SparsePattern {
            dofs,
            row_ptr,
            col_idx,
            tri_slots,
            symbolic: OnceLock::new(),
        }
    }

    pub fn dofs(&self) -> Dofs {
        self.dofs
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    fn find(&self, r: usize, c: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        row.binary_search(&c).ok().map(|k| self.row_ptr[r] + k)
    }
}

/// Symmetric sparse matrix over a [`SparsePattern`].
#[derive(Debug, Clone)]
pub struct SparseSpdMatrix {
    pattern: Arc<SparsePattern>,
    values: Vec<f64>,
}

impl SparseSpdMatrix {
    pub fn zeros(pattern: Arc<SparsePattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        SparseSpdMatrix { pattern, values }
    }

    /// Sums per-triangle 3x3 element matrices into the global matrix.
    /// Rows and columns of vertices without an unknown are dropped.
    pub fn assemble(pattern: Arc<SparsePattern>, mut element: impl FnMut(usize) -> [[f64; 3]; 3]) -> Self {
        let mut m = Self::zeros(pattern);
        for t in 0..m.pattern.tri_slots.len() {
            let local = element(t);
            let slots = m.pattern.tri_slots[t];
            for i in 0..3 {
                for j in 0..3 {
                    let s = slots[3 * i + j];
                    if s != ABSENT {
                        m.values[s] += local[i][j];
                    }
                }
            }
        }
        m
    }

    pub fn pattern(&self) -> &Arc<SparsePattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pattern.find(r, c).map_or(0.0, |k| self.values[k])
    }

    /// Adds `d[i]` to each diagonal entry.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.dim());
        for (i, &x) in d.iter().enumerate() {
            let k = self.pattern.find(i, i).expect("diagonal outside pattern");
            self.values[k] += x;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        (0..p.dim())
            .map(|r| {
                (p.row_ptr[r]..p.row_ptr[r + 1])
                    .map(|k| self.values[k] * x[p.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let p = &self.pattern;
        let mut worst: f64 = 0.0;
        for r in 0..p.dim() {
            for k in p.row_ptr[r]..p.row_ptr[r + 1] {
                let c = p.col_idx[k];
                worst = worst.max((self.values[k] - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        let p = &self.pattern;
        for (r, row) in d.iter_mut().enumerate() {
            for k in p.row_ptr[r]..p.row_ptr[r + 1] {
                row[p.col_idx[k]] = self.values[k];
            }
        }
        d
    }
}
