//! Discrete Hessian of a P1 field by double regularization: a smoothed
//! weak second derivative in V_0h, then a Neumann-type correction over all
//! vertices.

use crate::error::{Error, Result};
use crate::fem::{Dofs, LinearSolver, P1Space, ScalarField, SpdFactor, SymTensorField};
use crate::psd::SymMat2;

/// Interior vector `-1/2 sum_T |T| (d_i u d_j phi_l + d_j u d_i phi_l)`.
/// Indices are 0-based (`0` = x1, `1` = x2).
pub fn mixed_second_derivative_rhs(space: &P1Space, u: &ScalarField, i: usize, j: usize) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    if i > 1 || j > 1 {
        return Err(Error::InvalidArgument(format!(
            "derivative index ({i}, {j}) out of range"
        )));
    }
    if u.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: u.len(),
        });
    }
    let mut rhs = vec![0.0; mesh.num_interior()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = &space.geometry()[t];
        let du = g.gradient(tri.map(|v| u.values()[v]));
        for (a, &v) in tri.iter().enumerate() {
            if let Some(l) = mesh.interior_index(v) {
                let dphi = g.grads[a];
                rhs[l] -= 0.5 * g.area * (du[i] * dphi[j] + du[j] * dphi[i]);
            }
        }
    }
    Ok(rhs)
}

/// Factorized systems for `D2_h`; they depend only on the mesh and `c`.
#[derive(Debug)]
pub struct HessianOperator {
    interior: SpdFactor,
    full: SpdFactor,
    c: f64,
}

impl HessianOperator {
    pub fn new(space: &P1Space, c: f64, solver: LinearSolver) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "regularization c must be positive, got {c}"
            )));
        }
        if space.mesh().num_interior() == 0 {
            return Err(Error::NoInteriorVertices);
        }
        let build = |dofs: Dofs| {
            let mut a = space.assemble(dofs, |t| {
                let area = space.geometry()[t].area;
                (c * area * area, SymMat2::IDENTITY)
            });
            match dofs {
                Dofs::Interior => a.add_diagonal(&space.interior_weights()),
                Dofs::All => a.add_diagonal(space.weights()),
            }
            SpdFactor::new(&a, solver)
        };
        Ok(HessianOperator {
            interior: build(Dofs::Interior)?,
            full: build(Dofs::All)?,
            c,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// One component `D2_ij u` over all vertices.
    pub fn component(&self, space: &P1Space, u: &ScalarField, i: usize, j: usize) -> Result<Vec<f64>> {
        let rhs = mixed_second_derivative_rhs(space, u, i, j)?;
        let pi = ScalarField::from_interior(space.mesh(), &self.interior.solve(&rhs)?);
        let rhs2: Vec<f64> = space.weights().iter().zip(pi.values()).map(|(m, p)| m * p).collect();
        self.full.solve(&rhs2)
    }

    pub fn apply(&self, space: &P1Space, u: &ScalarField) -> Result<SymTensorField> {
        let d11 = self.component(space, u, 0, 0)?;
        let d12 = self.component(space, u, 0, 1)?;
        let d22 = self.component(space, u, 1, 1)?;
        Ok(SymTensorField::new(
            (0..d11.len()).map(|k| SymMat2::new(d11[k], d12[k], d22[k])).collect(),
        ))
    }
}

/// Convenience wrapper building the operator for a single evaluation.
pub fn double_regularized_hessian(space: &P1Space, u: &ScalarField, c: f64) -> Result<SymTensorField> {
    HessianOperator::new(space, c, LinearSolver::Cholesky)?.apply(space, u)
}
