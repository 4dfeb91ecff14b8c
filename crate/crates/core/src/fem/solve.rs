//! SPD linear solves: sparse Cholesky with fill-reducing ordering, or
//! Jacobi-preconditioned conjugate gradients.

use faer::linalg::cholesky::llt::factor::LltError as DenseLltError;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::linalg::LltError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{ColMut, Side};
use serde::{Deserialize, Serialize};

use super::sparse::SparseSpdMatrix;
use crate::error::{Error, Result};

/// Residual bound guaranteed by the direct path.
pub const DIRECT_TOLERANCE: f64 = 1e-10;
const MAX_REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LinearSolver {
    #[default]
    Cholesky,
    /// Conjugate gradients; stops at relative residual `tol` or after
    /// `max_iter_factor * N` iterations.
    Pcg {
        tol: f64,
        max_iter_factor: usize,
    },
}

impl LinearSolver {
    pub fn pcg() -> Self {
        LinearSolver::Pcg {
            tol: 1e-10,
            max_iter_factor: 10,
        }
    }
}

/// A matrix prepared for repeated solves.
pub struct SpdFactor {
    matrix: SparseSpdMatrix,
    kind: FactorKind,
}

enum FactorKind {
    Direct(Llt<usize, f64>),
    Pcg {
        inv_diag: Vec<f64>,
        tol: f64,
        max_iter: usize,
    },
}

impl std::fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            FactorKind::Direct(_) => "cholesky",
            FactorKind::Pcg { .. } => "pcg",
        };
        f.debug_struct("SpdFactor")
            .field("dim", &self.matrix.dim())
            .field("kind", &kind)
            .finish()
    }
}

impl SpdFactor {
    pub fn new(matrix: &SparseSpdMatrix, solver: LinearSolver) -> Result<Self> {
        let n = matrix.dim();
        let kind = match solver {
            LinearSolver::Cholesky => {
                let pattern = matrix.pattern();
                // full symmetric CSR is its own transpose, so it doubles as CSC
                let sym = SymbolicSparseColMatRef::new_checked(n, n, pattern.row_ptr(), None, pattern.col_idx());
                let symbolic = match pattern.symbolic.get() {
                    Some(s) => s.clone(),
                    None => {
                        let s = SymbolicLlt::try_new(sym, Side::Lower)
                            .map_err(|e| Error::InvalidArgument(format!("symbolic factorization failed: {e:?}")))?;
                        pattern.symbolic.get_or_init(|| s).clone()
                    }
                };
                let mat = SparseColMatRef::new(sym, matrix.values());
                let llt = Llt::try_new_with_symbolic(symbolic, mat, Side::Lower).map_err(|e| match e {
                    LltError::Numeric(DenseLltError::NonPositivePivot { index }) => {
                        Error::NotPositiveDefinite { index }
                    }
                    other => Error::InvalidArgument(format!("cholesky factorization failed: {other:?}")),
                })?;
                FactorKind::Direct(llt)
            }
            LinearSolver::Pcg { tol, max_iter_factor } => {
                let diag = matrix.diagonal();
                if let Some(index) = diag.iter().position(|&d| !(d > 0.0)) {
                    return Err(Error::NotPositiveDefinite { index });
                }
                FactorKind::Pcg {
                    inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
                    tol,
                    max_iter: max_iter_factor.max(1) * n.max(1),
                }
            }
        };
        Ok(SpdFactor {
            matrix: matrix.clone(),
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SparseSpdMatrix {
        &self.matrix
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        match &self.kind {
            FactorKind::Direct(llt) => {
                let mut x = b.to_vec();
                llt.solve_in_place(ColMut::from_slice_mut(&mut x));
                for _ in 0..MAX_REFINEMENT_STEPS {
                    let r = residual(&self.matrix, &x, b);
                    if norm(&r) <= 0.1 * DIRECT_TOLERANCE * bnorm {
                        break;
                    }
                    let mut d = r;
                    llt.solve_in_place(ColMut::from_slice_mut(&mut d));
                    x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
                }
                let rel = norm(&residual(&self.matrix, &x, b)) / bnorm;
                if !(rel <= DIRECT_TOLERANCE) {
                    return Err(Error::IterativeSolve {
                        iterations: MAX_REFINEMENT_STEPS,
                        residual: rel,
                    });
                }
                Ok(x)
            }
            FactorKind::Pcg {
                inv_diag,
                tol,
                max_iter,
            } => pcg(&self.matrix, inv_diag, b, *tol, *max_iter),
        }
    }
}

/// One-shot solve with the default direct method.
pub fn solve_spd(a: &SparseSpdMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SpdFactor::new(a, LinearSolver::Cholesky)?.solve(b)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `b - A x`
fn residual(a: &SparseSpdMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

fn pcg(a: &SparseSpdMatrix, inv_diag: &[f64], b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { index: it });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::IterativeSolve {
        iterations: max_iter,
        residual: norm(&residual(a, &x, b)) / bnorm,
    })
}
