//! Operator-splitting inverse iteration for the Monge-Ampere eigenvalue
//! problem `det D2 u = lambda |u|^2` with `u = 0` on the boundary.
//!
//! Each outer iteration freezes `f = R(u^k) (u^k)^2` and runs inner
//! pseudo-time steps made of three sub-steps:
//!
//! 1. a backward Euler elliptic solve with coefficient `eps I + cof(p)`,
//! 2. an explicit relaxation of the tensor `p` toward the discrete Hessian,
//!    followed by projection onto PSD matrices,
//! 3. normalization in the lumped norm.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_stiffness, poisson_initial, smallest_laplacian_eigenvalue, LinearSolver, P1Space, ScalarField, SpdFactor,
    SymTensorField,
};
use crate::hessian::HessianOperator;
use crate::mesh::{DomainSpec, TriMesh};
use crate::psd::SymMat2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tau: f64,
    /// `eps = eps_coeff * h^2`.
    pub eps_coeff: f64,
    /// Hessian regularization constant.
    pub c: f64,
    /// Source of the Poisson initial guess.
    pub eta: f64,
    /// `gamma = beta * lambda_0`.
    pub beta: f64,
    /// Outer stopping tolerance on `||u^{k+1} - u^k||_h`.
    pub xi: f64,
    pub inner_steps: usize,
    pub max_outer: usize,
    pub lambda0_tol: f64,
    pub linear_solver: LinearSolver,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: 0.5,
            eps_coeff: 2.0,
            c: 2.0,
            eta: 1.0,
            beta: 1.0,
            xi: 1e-6,
            inner_steps: 1,
            max_outer: 500,
            lambda0_tol: 1e-8,
            linear_solver: LinearSolver::Cholesky,
        }
    }
}

impl SolverConfig {
    /// Defaults tuned per domain; the eye needs a smaller step and more
    /// regularization near its corners.
    pub fn for_domain(spec: &DomainSpec) -> Self {
        match spec {
            DomainSpec::Eye => SolverConfig {
                tau: 0.125,
                eps_coeff: 4.0,
                c: 4.0,
                ..Self::default()
            },
            _ => Self::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("eps_coeff", self.eps_coeff),
            ("c", self.c),
            ("eta", self.eta),
            ("beta", self.beta),
            ("xi", self.xi),
            ("lambda0_tol", self.lambda0_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.inner_steps == 0 || self.max_outer == 0 {
            return Err(Error::InvalidArgument(
                "inner_steps and max_outer must be at least 1".into(),
            ));
        }
        if let LinearSolver::Pcg { tol, max_iter_factor } = self.linear_solver {
            if !(tol > 0.0) || max_iter_factor == 0 {
                return Err(Error::InvalidArgument(
                    "pcg tolerance and iteration factor must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Iterates carried through the outer and inner loops.
#[derive(Debug, Clone)]
pub struct SolveState {
    pub u: ScalarField,
    pub v: ScalarField,
    pub p: SymTensorField,
    pub f: ScalarField,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub lambda_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_u: Vec<f64>,
    pub min_u: f64,
    /// Largest nodal value; positive values flag loss of negativity.
    pub max_u: f64,
    pub lambda_final: f64,
    pub lambda0: f64,
    pub gamma: f64,
    pub eps: f64,
    pub h: f64,
    pub num_vertices: usize,
    pub num_triangles: usize,
    pub wall_time: f64,
}

/// Per-mesh operators and constants shared by every iteration.
#[derive(Debug)]
pub struct Context {
    pub space: P1Space,
    pub hessian: HessianOperator,
    pub cfg: SolverConfig,
    pub eps: f64,
    pub gamma: f64,
    pub lambda0: f64,
}

impl Context {
    pub fn new(mesh: TriMesh, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if mesh.num_interior() < 3 {
            return Err(Error::InvalidArgument(format!(
                "mesh has {} interior vertices; at least 3 are required",
                mesh.num_interior()
            )));
        }
        let space = P1Space::new(mesh);
        let hessian = HessianOperator::new(&space, cfg.c, cfg.linear_solver)?;
        let lambda0 = smallest_laplacian_eigenvalue(&space, cfg.lambda0_tol)?;
        let h = space.mesh().h();
        Ok(Context {
            eps: cfg.eps_coeff * h * h,
            gamma: cfg.beta * lambda0,
            lambda0,
            space,
            hessian,
            cfg,
        })
    }

    pub fn hessian(&self, u: &ScalarField) -> Result<SymTensorField> {
        self.hessian.apply(&self.space, u)
    }

    pub fn rayleigh_quotient(&self, u: &ScalarField, hess: &SymTensorField) -> Result<f64> {
        rayleigh_quotient(&self.space, u, hess)
    }

    pub fn step_elliptic(&self, v: &ScalarField, p: &SymTensorField, f: &ScalarField) -> Result<ScalarField> {
        step_elliptic(&self.space, v, p, f, self.eps, self.cfg.tau, self.cfg.linear_solver)
    }

    pub fn step_tensor(&self, p: &SymTensorField, hess_v: &SymTensorField) -> SymTensorField {
        step_tensor(p, hess_v, self.gamma, self.cfg.tau)
    }

    pub fn step_normalize(&self, v: &ScalarField) -> Result<ScalarField> {
        step_normalize(v, self.space.weights())
    }
}

/// `[u^T A u] / [2 sum_m m_m (-u_m)^3]` with `A` the stiffness of `cof(P+(hess))`.
pub fn rayleigh_quotient(space: &P1Space, u: &ScalarField, hess: &SymTensorField) -> Result<f64> {
    let mesh = space.mesh();
    let coeff = hess.map(|m| m.project_psd().cofactor());
    let a = assemble_stiffness(space, &coeff)?;
    let ui = u.interior_values(mesh);
    let num = a.quadratic_form(&ui);
    let den: f64 = 2.0
        * space
            .weights()
            .iter()
            .zip(u.values())
            .map(|(m, x)| m * (-x).powi(3))
            .sum::<f64>();
    if !(den > 1e-14) {
        return Err(Error::DegenerateIterate(
            "Rayleigh quotient denominator is not positive",
        ));
    }
    Ok(num / den)
}

/// Backward Euler step `(M + tau K) v' = M v - 2 tau M f` over interior
/// vertices, `K` the stiffness of `eps I + cof(p)`.
pub fn step_elliptic(
    space: &P1Space,
    v: &ScalarField,
    p: &SymTensorField,
    f: &ScalarField,
    eps: f64,
    tau: f64,
    solver: LinearSolver,
) -> Result<ScalarField> {
    let mesh = space.mesh();
    let coeff = p.map(|m| SymMat2::diag(eps, eps) + m.cofactor());
    let mut a = assemble_stiffness(space, &coeff)?;
    a.scale(tau);
    let m = space.interior_weights();
    a.add_diagonal(&m);
    let vi = v.interior_values(mesh);
    let fi = f.interior_values(mesh);
    let rhs: Vec<f64> = (0..m.len()).map(|k| m[k] * (vi[k] - 2.0 * tau * fi[k])).collect();
    let x = SpdFactor::new(&a, solver)?.solve(&rhs)?;
    Ok(ScalarField::from_interior(mesh, &x))
}

/// `P+(e^{-gamma tau} p + (1 - e^{-gamma tau}) hess_v)` vertex by vertex.
pub fn step_tensor(p: &SymTensorField, hess_v: &SymTensorField, gamma: f64, tau: f64) -> SymTensorField {
    let decay = (-gamma * tau).exp();
    blend_project(p, hess_v, decay)
}

pub(crate) fn blend_project(p: &SymTensorField, hess_v: &SymTensorField, decay: f64) -> SymTensorField {
    SymTensorField::new(
        p.values()
            .iter()
            .zip(hess_v.values())
            .map(|(&a, &b)| (decay * a + (1.0 - decay) * b).project_psd())
            .collect(),
    )
}

/// Rescales to unit lumped norm.
pub fn step_normalize(v: &ScalarField, weights: &[f64]) -> Result<ScalarField> {
    let n2 = crate::fem::inner_product_h(v, v, weights)?;
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::DegenerateIterate("cannot normalize a zero or non-finite field"));
    }
    Ok(v.scaled(1.0 / n2.sqrt()))
}

/// Result of one call to [`inner_solve`].
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub v: ScalarField,
    pub p: SymTensorField,
    pub passes: usize,
}

/// Runs `inner_steps` passes of elliptic step, Hessian relaxation and
/// normalization starting from `state.v`, `state.p`.
pub fn inner_solve(ctx: &Context, state: &SolveState) -> Result<InnerOutcome> {
    let mut v = state.v.clone();
    let mut p = state.p.clone();
    let mut passes = 0;
    for _ in 0..ctx.cfg.inner_steps {
        let v_third = ctx.step_elliptic(&v, &p, &state.f)?;
        let hess_v = ctx.hessian(&v_third)?;
        p = ctx.step_tensor(&p, &hess_v);
        v = ctx.step_normalize(&v_third)?;
        passes += 1;
    }
    Ok(InnerOutcome { v, p, passes })
}

/// Called after every outer iteration with the iteration number (1-based),
/// the eigenvalue estimate and the residual.
/// Snapshot passed to the monitor after each outer iteration.
#[derive(Debug, Clone, Copy)]
pub struct Iteration<'a> {
    /// 1-based outer iteration count.
    pub k: usize,
    /// `R(u^{k-1})`, the value used to build `f`.
    pub lambda: f64,
    pub residual: f64,
    pub u: &'a ScalarField,
}

pub type Monitor<'a> = &'a mut dyn FnMut(&Iteration<'_>);

pub fn solve_eigenproblem(mesh: TriMesh, cfg: SolverConfig) -> Result<SolveReport> {
    solve_with_monitor(mesh, cfg, &mut |_| {})
}

pub fn solve_with_monitor(mesh: TriMesh, cfg: SolverConfig, monitor: Monitor<'_>) -> Result<SolveReport> {
    let start = Instant::now();
    let ctx = Context::new(mesh, cfg)?;
    let (final_u, lambda_history, residual_history, converged) = outer_loop(&ctx, monitor)?;
    let hess = ctx.hessian(&final_u)?;
    let lambda_final = ctx.rayleigh_quotient(&final_u, &hess)?;
    let values = final_u.into_values();
    Ok(SolveReport {
        iterations: lambda_history.len(),
        lambda_history,
        residual_history,
        converged,
        min_u: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_u: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        final_u: values,
        lambda_final,
        lambda0: ctx.lambda0,
        gamma: ctx.gamma,
        eps: ctx.eps,
        h: ctx.space.mesh().h(),
        num_vertices: ctx.space.mesh().num_vertices(),
        num_triangles: ctx.space.mesh().num_triangles(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

type OuterResult = (ScalarField, Vec<f64>, Vec<f64>, bool);

fn outer_loop(ctx: &Context, monitor: Monitor<'_>) -> Result<OuterResult> {
    let mut u = ctx.step_normalize(&poisson_initial(&ctx.space, ctx.cfg.eta)?)?;
    let mut lambdas = Vec::new();
    let mut residuals = Vec::new();
    for k in 0..ctx.cfg.max_outer {
        let hess = ctx.hessian(&u)?;
        let lambda = ctx.rayleigh_quotient(&u, &hess)?;
        let f = ScalarField::new(u.values().iter().map(|x| lambda * x * x).collect(), u.space());
        let state = SolveState {
            v: u.clone(),
            p: hess.map(SymMat2::project_psd),
            f,
            lambda,
            u,
        };
        let inner = inner_solve(ctx, &state)?;
        let diff = ScalarField::new(
            inner
                .v
                .values()
                .iter()
                .zip(state.u.values())
                .map(|(a, b)| a - b)
                .collect(),
            inner.v.space(),
        );
        let residual = ctx.space.norm(&diff)?;
        if !residual.is_finite() || !lambda.is_finite() {
            return Err(Error::DegenerateIterate("iteration produced non-finite values"));
        }
        u = inner.v;
        lambdas.push(lambda);
        residuals.push(residual);
        monitor(&Iteration {
            k: k + 1,
            lambda,
            residual,
            u: &u,
        });
        if residual < ctx.cfg.xi {
            return Ok((u, lambdas, residuals, true));
        }
    }
    Ok((u, lambdas, residuals, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Space;
    use crate::mesh::generate_mesh;

    fn disk_ctx(h: f64) -> Context {
        Context::new(generate_mesh(&DomainSpec::Disk, h).unwrap(), SolverConfig::default()).unwrap()
    }

    fn interpolate(space: &P1Space, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let mut u = ScalarField::new(
            space.mesh().vertices().iter().map(|p| f(p[0], p[1])).collect(),
            Space::ZeroTrace,
        );
        for v in 0..space.mesh().num_vertices() {
            if space.mesh().is_boundary(v) {
                u.values_mut()[v] = 0.0;
            }
        }
        u
    }

    #[test]
    fn paraboloid_quotient_near_eight() {
        let ctx = disk_ctx(1.0 / 40.0);
        let u = interpolate(&ctx.space, |x, y| 0.5 * (x * x + y * y - 1.0));
        let id = SymTensorField::constant(u.len(), SymMat2::IDENTITY);
        let r = ctx.rayleigh_quotient(&u, &id).unwrap();
        assert!((r / 8.0 - 1.0).abs() < 0.05, "{r}");
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let ctx = disk_ctx(0.1);
        let u = interpolate(&ctx.space, |x, y| (x * x + 2.0 * y * y - 1.0) * (1.0 + 0.3 * x));
        let u3 = u.scaled(3.0);
        let r1 = ctx.rayleigh_quotient(&u, &ctx.hessian(&u).unwrap()).unwrap();
        let r3 = ctx.rayleigh_quotient(&u3, &ctx.hessian(&u3).unwrap()).unwrap();
        assert!((r1 - r3).abs() <= 1e-12 * r1.abs());
    }

    #[test]
    fn zero_field_is_degenerate() {
        let ctx = disk_ctx(0.2);
        let z = ScalarField::zeros(ctx.space.mesh().num_vertices(), Space::ZeroTrace);
        let id = SymTensorField::constant(z.len(), SymMat2::IDENTITY);
        assert!(matches!(
            ctx.rayleigh_quotient(&z, &id),
            Err(Error::DegenerateIterate(_))
        ));
        assert!(matches!(ctx.step_normalize(&z), Err(Error::DegenerateIterate(_))));
    }

    #[test]
    fn elliptic_step_zero_fixed_point_and_sign() {
        let ctx = disk_ctx(0.1);
        let n = ctx.space.mesh().num_vertices();
        let z = ScalarField::zeros(n, Space::ZeroTrace);
        let id = SymTensorField::constant(n, SymMat2::IDENTITY);
        let v = ctx.step_elliptic(&z, &id, &z).unwrap();
        assert!(v.values().iter().all(|&x| x == 0.0));

        let f = ScalarField::new(vec![1.0; n], Space::Full);
        let v = ctx.step_elliptic(&z, &id, &f).unwrap();
        assert!(v.values().iter().all(|&x| x <= 0.0));
        assert!(v.min() < 0.0);
    }

    #[test]
    fn elliptic_steady_state_is_radial_poisson() {
        let ctx = disk_ctx(1.0 / 20.0);
        let n = ctx.space.mesh().num_vertices();
        let id = SymTensorField::constant(n, SymMat2::IDENTITY);
        let f = ScalarField::new(vec![1.0; n], Space::Full);
        let mut v = ScalarField::zeros(n, Space::ZeroTrace);
        for _ in 0..200 {
            v = step_elliptic(&ctx.space, &v, &id, &f, ctx.eps, 10.0, LinearSolver::Cholesky).unwrap();
        }
        for (k, p) in ctx.space.mesh().vertices().iter().enumerate() {
            let exact = (p[0] * p[0] + p[1] * p[1] - 1.0) / (2.0 * (1.0 + ctx.eps));
            assert!((v.values()[k] - exact).abs() < 5e-3, "{} vs {exact}", v.values()[k]);
        }
    }

    #[test]
    fn tensor_step_limits_and_hand_case() {
        let p = SymTensorField::new(vec![SymMat2::diag(2.0, 0.0), SymMat2::new(1.0, 2.0, -1.0)]);
        let hv = SymTensorField::new(vec![SymMat2::diag(0.0, -2.0), SymMat2::new(3.0, 0.5, 1.0)]);
        let half = blend_project(&p, &hv, 0.5);
        assert_eq!(half.values()[0], SymMat2::diag(1.0, 0.0));

        let far = step_tensor(&p, &hv, 100.0, 1.0);
        for k in 0..2 {
            assert_eq!(far.values()[k], hv.values()[k].project_psd());
        }
        let none = step_tensor(&p, &hv, 0.0, 1.0);
        for k in 0..2 {
            assert_eq!(none.values()[k], p.values()[k].project_psd());
        }
    }

    #[test]
    fn normalize_scales_and_is_idempotent() {
        let ctx = disk_ctx(0.2);
        let u = interpolate(&ctx.space, |x, y| x * x + y - 3.0);
        let n = ctx.space.norm(&u).unwrap();
        let a = ctx.step_normalize(&u).unwrap();
        for (x, y) in a.values().iter().zip(u.values()) {
            assert!((x - y / n).abs() < 1e-15);
        }
        assert!((ctx.space.norm(&a).unwrap() - 1.0).abs() < 1e-14);
        let b = ctx.step_normalize(&a).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() < 1e-15));
        let c = ctx.step_normalize(&u.scaled(10.0)).unwrap();
        assert!(a.values().iter().zip(c.values()).all(|(x, y)| (x - y).abs() < 1e-15));
    }

    #[test]
    fn inner_solve_single_pass_keeps_invariants() {
        let ctx = disk_ctx(0.1);
        let u = ctx.step_normalize(&poisson_initial(&ctx.space, 1.0).unwrap()).unwrap();
        let hess = ctx.hessian(&u).unwrap();
        let lambda = ctx.rayleigh_quotient(&u, &hess).unwrap();
        let f = ScalarField::new(u.values().iter().map(|x| lambda * x * x).collect(), Space::Full);
        let state = SolveState {
            v: u.clone(),
            p: hess.map(SymMat2::project_psd),
            f,
            lambda,
            u,
        };
        let out = inner_solve(&ctx, &state).unwrap();
        assert_eq!(out.passes, 1);
        assert!((ctx.space.norm(&out.v).unwrap() - 1.0).abs() < 1e-12);
        assert!(out
            .p
            .values()
            .iter()
            .all(|m| m.min_eigenvalue() >= -1e-14 * m.frobenius().max(1.0)));
    }

    #[test]
    fn coarse_disk_converges() {
        let mesh = generate_mesh(&DomainSpec::Disk, 0.1).unwrap();
        let r = solve_eigenproblem(mesh, SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert!(*r.residual_history.last().unwrap() < 1e-6);
        assert!(r.lambda_final > 4.0 && r.lambda_final < 8.0, "{}", r.lambda_final);
        assert!(r.min_u < 0.0);
    }

    #[test]
    fn invalid_config_rejected() {
        let mesh = generate_mesh(&DomainSpec::Disk, 0.2).unwrap();
        let cfg = SolverConfig {
            tau: -1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(solve_eigenproblem(mesh, cfg), Err(Error::InvalidArgument(_))));
    }
}
