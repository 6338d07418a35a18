//! Forward eigenstrain solves and Helmholtz decompositions on box meshes.
//!
//! The forward problem finds `U` with
//! `∫ (C:∇ₛU):∇ₛv = ∫ (C:ε*):∇ₛv` for every test field `v`; the traction
//! condition is natural. Replacing `C` by the identity gives the zero-flux
//! decomposition `ε = ∇ₛU + (ε − ∇ₛU)`, and fixing `U = 0` on the boundary gives
//! the decomposition whose potential part is invisible to ray transforms.

mod incompat;
mod operator;

pub use crate::grid::{build_box_mesh, BoxMesh};
pub use incompat::incompatibility;
pub use operator::{
    assemble_dense, conjugate_gradient, element_matrix, material_matrix, SolveStats, SolverOptions,
    StiffnessOperator,
};
pub use operator::weak_residual;

use serde::{Deserialize, Serialize};

use crate::grid::{GridTensorField, GridVectorField};
use crate::tensor::{ElasticModel, Weight};
use crate::Result;

/// Boundary condition of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Natural condition `∇ₛU·n = ε·n`; the solenoidal part carries no boundary flux.
    ZeroFlux,
    /// Essential condition `U = 0` on the boundary.
    ZeroDisplacement,
}

/// Displacement, stress and elastic strain of a forward solve (Gauss-sampled).
#[derive(Debug, Clone)]
pub struct ForwardSolution {
    pub u: GridVectorField,
    pub sigma: GridTensorField,
    pub eps_elastic: GridTensorField,
    pub stats: SolveStats,
}

fn solve_potential(
    eps: &GridTensorField,
    mesh: &BoxMesh,
    weight: &Weight,
    mode: BoundaryMode,
    opts: &SolverOptions,
) -> Result<(GridVectorField, GridTensorField, GridTensorField, SolveStats)> {
    let spec = mesh.spec();
    let eg = operator::gauss_on(eps, &spec)?;
    let op = StiffnessOperator::new(spec, weight, mode == BoundaryMode::ZeroDisplacement);
    let f = op.load(&eg, weight);
    let (x, stats) = conjugate_gradient(&op, &f, opts)?;
    let u = GridVectorField { grid: spec, values: x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect() };
    let grad = u.symmetric_gradient();
    Ok((u, grad, eg, stats))
}

/// Stress from an eigenstrain on a traction-free box.
pub fn forward_solve(eps_star: &GridTensorField, m: &ElasticModel, mesh: &BoxMesh) -> Result<ForwardSolution> {
    forward_solve_with(eps_star, m, mesh, &SolverOptions::default())
}

pub fn forward_solve_with(
    eps_star: &GridTensorField,
    m: &ElasticModel,
    mesh: &BoxMesh,
    opts: &SolverOptions,
) -> Result<ForwardSolution> {
    let (u, grad, eg, stats) = solve_potential(eps_star, mesh, &Weight::Stiffness(*m), BoundaryMode::ZeroFlux, opts)?;
    let eps_elastic = grad.sub(&eg)?;
    let sigma = eps_elastic.map(|e| m.apply_stiffness(e));
    Ok(ForwardSolution { u, sigma, eps_elastic, stats })
}

/// Potential/solenoidal split of a strain-like field.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// `∇ₛU`.
    pub potential: GridTensorField,
    /// `ε − ∇ₛU`.
    pub solenoidal: GridTensorField,
    pub u: GridVectorField,
    pub stats: SolveStats,
}

/// Identity-weighted decomposition.
pub fn helmholtz_decompose(eps: &GridTensorField, mesh: &BoxMesh, mode: BoundaryMode) -> Result<Decomposition> {
    helmholtz_decompose_weighted(eps, mesh, mode, &Weight::Identity, &SolverOptions::default())
}

/// Decomposition orthogonal in the `W`-weighted product; with `W = C` the
/// solenoidal part is the eigenstrain whose stress-equivalent is divergence free.
pub fn helmholtz_decompose_weighted(
    eps: &GridTensorField,
    mesh: &BoxMesh,
    mode: BoundaryMode,
    weight: &Weight,
    opts: &SolverOptions,
) -> Result<Decomposition> {
    let (u, potential, eg, stats) = solve_potential(eps, mesh, weight, mode, opts)?;
    let solenoidal = eg.sub(&potential)?;
    Ok(Decomposition { potential, solenoidal, u, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{mean_stress, normalized_inner_product, Sampling};
    use crate::maxwell::MaxwellPotential;
    use crate::tensor::SymTensor2;

    fn smooth_u(p: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = p;
        [1e-3 * (x * x + 0.5 * y * z), 1e-3 * x * y, 1e-3 * (z * z - x * z)]
    }

    fn grad_smooth_u(p: [f64; 3]) -> SymTensor2 {
        let [x, y, z] = p;
        // ∇U = 1e-3 [[2x, z/2, y/2], [y, x, 0], [−z, 0, 2z − x]]
        let g = [[2.0 * x, 0.5 * z, 0.5 * y], [y, x, 0.0], [-z, 0.0, 2.0 * z - x]];
        SymTensor2::from_matrix(&g).scale(1e-3)
    }

    #[test]
    fn uniform_eigenstrain_patch_test() {
        let m = ElasticModel::inconel_718();
        for n in [2, 3, 5] {
            let mesh = BoxMesh::new([1.0, 0.8, 0.6], [n, n + 1, n]).unwrap();
            let eps = GridTensorField::constant(&mesh, Sampling::Nodal, SymTensor2::new(1e-3, -2e-3, 5e-4, 3e-4, 0.0, -1e-4));
            let sol = forward_solve(&eps, &m, &mesh).unwrap();
            assert!(sol.sigma.max_abs() < 1e-10 * m.youngs_modulus(), "n = {n}: {}", sol.sigma.max_abs());
        }
    }

    #[test]
    fn compatible_eigenstrain_converges_to_zero() {
        let m = ElasticModel::tin_bronze();
        let mut prev = f64::INFINITY;
        for n in [4, 8] {
            let mesh = BoxMesh::cube(1.0, n).unwrap();
            let eps = GridTensorField::from_fn_gauss(&mesh, grad_smooth_u);
            let s = forward_solve(&eps, &m, &mesh).unwrap().sigma.max_abs();
            assert!(s < prev * 0.75, "n = {n}: {s} vs {prev}");
            prev = s;
        }
    }

    #[test]
    fn representable_null_field_is_invisible() {
        let m = ElasticModel::tin_bronze();
        let mesh = BoxMesh::cube(1.0, 4).unwrap();
        let u = GridVectorField::from_fn(&mesh, smooth_u);
        let eps = u.symmetric_gradient();
        let sol = forward_solve(&eps, &m, &mesh).unwrap();
        assert!(sol.sigma.max_abs() < 1e-9 * m.youngs_modulus());
    }

    #[test]
    fn forward_stress_has_zero_mean() {
        let m = ElasticModel::tin_bronze();
        let mesh = BoxMesh::cube(1.0, 6).unwrap();
        let eps = GridTensorField::from_fn_gauss(&mesh, |p| {
            SymTensor2::new(1e-3 * (1.0 - p[0] * p[0]), 0.0, 5e-4 * p[1] * p[1], 0.0, 2e-4 * p[2], 0.0)
        });
        let sol = forward_solve(&eps, &m, &mesh).unwrap();
        let mean = mean_stress(&sol.sigma).unwrap();
        assert!(mean.max_abs() < 1e-8 * sol.sigma.max_abs());
    }

    #[test]
    fn decompositions_recompose_and_are_orthogonal() {
        let mesh = BoxMesh::cube(1.0, 6).unwrap();
        let eps = GridTensorField::from_fn_gauss(&mesh, |p| {
            SymTensor2::new(p[0] * p[1], (p[2] * 2.0).sin(), p[0].powi(2), 0.3 * p[1], p[0] * p[2], 1.0)
        });
        for mode in [BoundaryMode::ZeroFlux, BoundaryMode::ZeroDisplacement] {
            let d = helmholtz_decompose(&eps, &mesh, mode).unwrap();
            assert!(d.potential.add(&d.solenoidal).unwrap().sub(&eps).unwrap().max_abs() < 1e-14);
            let ip = normalized_inner_product(&d.potential, &d.solenoidal, Weight::Identity).unwrap();
            assert!(ip.abs() < 1e-8, "{mode:?}: {ip}");
        }
    }

    #[test]
    fn boundary_vanishing_potential_is_pure_potential() {
        let mesh = BoxMesh::cube(1.0, 6).unwrap();
        let u = GridVectorField::from_fn(&mesh, |p| {
            let b = (1.0 - p[0] * p[0]) * (1.0 - p[1] * p[1]) * (1.0 - p[2] * p[2]);
            [b * p[1], b * 0.5, b * p[0] * p[2]]
        });
        let eps = u.symmetric_gradient();
        let d = helmholtz_decompose(&eps, &mesh, BoundaryMode::ZeroDisplacement).unwrap();
        assert!(d.solenoidal.max_abs() < 1e-8 * eps.max_abs());
    }

    #[test]
    fn maxwell_solenoid_has_small_potential_part() {
        let p = MaxwellPotential::from_coefficients(1.0, 1, 2, &[1.0, 0.5, -0.7, 0.3]).unwrap();
        let sp = p.stress_polys();
        let mut prev = f64::INFINITY;
        for n in [4, 8] {
            let mesh = BoxMesh::cube(1.0, n).unwrap();
            let eps = GridTensorField::from_fn_gauss(&mesh, |x| sp.eval(x));
            let d = helmholtz_decompose(&eps, &mesh, BoundaryMode::ZeroFlux).unwrap();
            let rel = crate::grid::l2_norm(&d.potential) / crate::grid::l2_norm(&eps);
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev < 0.1, "{prev}");
    }
}
