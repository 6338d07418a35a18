//! Trivial inverse solutions and range/null-space diagnostics.
//!
//! Any equilibrated, traction-free stress `σ` is produced by the eigenstrain
//! `−S:σ`. Everything else an inverse eigenstrain solver can return differs from
//! it by an element of the null space, which these utilities expose.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::fem::{forward_solve, helmholtz_decompose_weighted, weak_residual, BoundaryMode, SolverOptions};
use crate::grid::{inner_product, mean_stress, normalized_inner_product, BoxMesh, GridTensorField, QuadratureRule};
use crate::lstsq::{self, DEFAULT_RCOND};
use crate::maxwell::MaxwellPotential;
use crate::tensor::{ElasticModel, Weight};
use crate::{Error, Result};

/// Threshold above which the equilibrium checks warn.
pub const EQUILIBRIUM_WARN: f64 = 1e-6;

/// How far a tensor field is from being divergence free with zero boundary flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCheck {
    /// `max|mean σ| / max|σ|`.
    pub mean_ratio: f64,
    /// Largest normalised weak residual at interior nodes (divergence).
    pub interior_residual: f64,
    /// Largest normalised weak residual at boundary nodes (flux).
    pub boundary_residual: f64,
    pub warnings: Vec<String>,
}

/// Weak divergence, boundary flux and mean of a field, each relative to `max|σ|`.
pub fn check_equilibrium(field: &GridTensorField) -> Result<EquilibriumCheck> {
    let spec = field.grid;
    let smax = field.max_abs();
    if smax == 0.0 {
        return Ok(EquilibriumCheck { mean_ratio: 0.0, interior_residual: 0.0, boundary_residual: 0.0, warnings: Vec::new() });
    }
    let mean_ratio = mean_stress(field)?.max_abs() / smax;
    let (res, scale) = weak_residual(field);
    let mut interior = 0.0_f64;
    let mut boundary = 0.0_f64;
    for (node, (r, s)) in res.iter().zip(&scale).enumerate() {
        let v = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() / (s * smax);
        if spec.is_boundary_node(node) {
            boundary = boundary.max(v);
        } else {
            interior = interior.max(v);
        }
    }
    let mut warnings = Vec::new();
    if mean_ratio > EQUILIBRIUM_WARN {
        warnings.push(format!("mean stress is {mean_ratio:.3e} of the peak; the field is not self-equilibrated"));
    }
    if boundary > EQUILIBRIUM_WARN {
        warnings.push(format!("weak boundary traction residual {boundary:.3e} of the peak stress"));
    }
    Ok(EquilibriumCheck { mean_ratio, interior_residual: interior, boundary_residual: boundary, warnings })
}

/// Eigenstrain `−S:σ`, which reproduces `σ` exactly in the continuum.
pub fn trivial_solution(sigma: &GridTensorField, m: &ElasticModel) -> GridTensorField {
    sigma.map(|s| -m.apply_compliance(s))
}

/// [`trivial_solution`] together with the equilibrium pre-check of `σ`.
pub fn trivial_solution_checked(sigma: &GridTensorField, m: &ElasticModel) -> Result<(GridTensorField, EquilibriumCheck)> {
    Ok((trivial_solution(sigma, m), check_equilibrium(sigma)?))
}

/// Orthogonality and membership diagnostics of a two-part split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `⟨pot, sol⟩_C / (‖pot‖_C ‖sol‖_C)`.
    pub orthogonality_residual: f64,
    /// Same with the identity weight.
    pub orthogonality_identity: f64,
    /// `max|pot + sol − original| / max|original|`, when the original is supplied.
    pub recomposition_error: Option<f64>,
    pub norm_potential: f64,
    pub norm_solenoidal: f64,
    /// Equilibrium of `C:sol` (membership of `sol` in the C-weighted complement).
    pub stiffness_membership: EquilibriumCheck,
    /// Equilibrium of `sol` itself (membership in the plain complement).
    pub identity_membership: EquilibriumCheck,
}

pub fn verify_energy_orthogonality(
    pot: &GridTensorField,
    sol: &GridTensorField,
    m: &ElasticModel,
    mesh: &BoxMesh,
    original: Option<&GridTensorField>,
) -> Result<DecompositionReport> {
    let spec = mesh.spec();
    if pot.grid != spec || sol.grid != spec || original.is_some_and(|o| o.grid != spec) {
        return Err(Error::MeshMismatch);
    }
    let c = Weight::Stiffness(*m);
    let recomposition_error = match original {
        Some(o) => {
            let d = pot.add(sol)?.sub(o)?.max_abs();
            let s = o.max_abs();
            Some(if s > 0.0 { d / s } else { d })
        }
        None => None,
    };
    let norm = |f: &GridTensorField| inner_product(f, f, Weight::Identity, QuadratureRule::Gauss2).map(f64::sqrt);
    Ok(DecompositionReport {
        orthogonality_residual: normalized_inner_product(pot, sol, c)?,
        orthogonality_identity: normalized_inner_product(pot, sol, Weight::Identity)?,
        recomposition_error,
        norm_potential: norm(pot)?,
        norm_solenoidal: norm(sol)?,
        stiffness_membership: check_equilibrium(&sol.map(|e| m.apply_stiffness(e)))?,
        identity_membership: check_equilibrium(sol)?,
    })
}

/// Fields of the trivial-solution pipeline for a stress field on a mesh.
#[derive(Debug, Clone)]
pub struct TrivialPipeline {
    /// `−S:σ`.
    pub trivial: GridTensorField,
    /// Identity-weighted zero-flux split of the trivial solution.
    pub potential: GridTensorField,
    pub solenoidal: GridTensorField,
    /// `forward_solve(trivial).σ`.
    pub sigma_from_trivial: GridTensorField,
    /// `forward_solve(solenoidal).σ`.
    pub sigma_from_solenoidal: GridTensorField,
    pub equilibrium: EquilibriumCheck,
    pub report: DecompositionReport,
}

/// Trivial eigenstrain, its potential/solenoidal split, and the stresses both produce.
pub fn trivial_pipeline(sigma: &GridTensorField, m: &ElasticModel, mesh: &BoxMesh) -> Result<TrivialPipeline> {
    let (trivial, equilibrium) = trivial_solution_checked(sigma, m)?;
    let d = helmholtz_decompose_weighted(&trivial, mesh, BoundaryMode::ZeroFlux, &Weight::Identity, &SolverOptions::default())?;
    let sigma_from_trivial = forward_solve(&trivial, m, mesh)?.sigma;
    let sigma_from_solenoidal = forward_solve(&d.solenoidal, m, mesh)?.sigma;
    let trivial_g = trivial.to_gauss();
    let report = verify_energy_orthogonality(&d.potential, &d.solenoidal, m, mesh, Some(&trivial_g))?;
    Ok(TrivialPipeline {
        trivial: trivial_g,
        potential: d.potential,
        solenoidal: d.solenoidal,
        sigma_from_trivial,
        sigma_from_solenoidal,
        equilibrium,
        report,
    })
}

/// Maxwell-basis eigenstrain chosen from the null complement to match a stress field.
#[derive(Debug, Clone)]
pub struct MaxwellEigenstrainFit {
    pub coefficients: Vec<f64>,
    pub potential: MaxwellPotential,
    pub eigenstrain: GridTensorField,
    pub stress: GridTensorField,
    /// `‖σ_fit − σ‖ / ‖σ‖` over the Gauss points.
    pub relative_residual: f64,
}

/// Least-squares eigenstrain `Σ c_k RΛ_k` whose forward stress matches `sigma`.
///
/// Each basis field is read as an eigenstrain, pushed through the forward solver,
/// and the resulting stresses at the Gauss points form the design columns.
pub fn maxwell_inverse_eigenstrain(
    sigma: &GridTensorField,
    basis: &[MaxwellPotential],
    m: &ElasticModel,
    mesh: &BoxMesh,
) -> Result<MaxwellEigenstrainFit> {
    let first = basis.first().ok_or_else(|| Error::InvalidInput("empty Maxwell basis".into()))?;
    let target = sigma.to_gauss();
    if target.grid != mesh.spec() {
        return Err(Error::MeshMismatch);
    }
    let mut eig_cols = Vec::with_capacity(basis.len());
    let mut cols = Vec::with_capacity(basis.len());
    for b in basis {
        let sp = b.stress_polys();
        let eps = GridTensorField::from_fn_gauss(mesh, |x| sp.eval(x));
        let s = forward_solve(&eps, m, mesh)?.sigma;
        cols.push(s.values.iter().flat_map(|t| t.to_array()).collect::<Vec<f64>>());
        eig_cols.push(eps);
    }
    let rows = 6 * target.values.len();
    let a = DMatrix::from_fn(rows, basis.len(), |i, j| cols[j][i]);
    let rhs = DVector::from_iterator(rows, target.values.iter().flat_map(|t| t.to_array()));
    let sol = lstsq::solve(&a, &rhs, DEFAULT_RCOND)?;
    let coefficients: Vec<f64> = sol.x.iter().copied().collect();
    let mut total = vec![0.0; first.len()];
    for (bk, ck) in basis.iter().zip(&coefficients) {
        for (t, c) in total.iter_mut().zip(bk.coefficients()) {
            *t += ck * c;
        }
    }
    let potential = MaxwellPotential::from_coefficients(first.half_size, first.z_order, first.plane_terms, &total)?;
    let mut eigenstrain = GridTensorField::zeros(mesh, crate::grid::Sampling::CellGauss);
    let mut stress = GridTensorField::zeros(mesh, crate::grid::Sampling::CellGauss);
    for (k, ck) in coefficients.iter().enumerate() {
        eigenstrain = eigenstrain.add(&eig_cols[k].scale(*ck))?;
        let col = &cols[k];
        for (i, v) in stress.values.iter_mut().enumerate() {
            let mut arr = v.to_array();
            for c in 0..6 {
                arr[c] += ck * col[6 * i + c];
            }
            *v = crate::tensor::SymTensor2::from_array(arr);
        }
    }
    let bnorm = rhs.norm();
    let relative_residual = if bnorm > 0.0 { sol.residual_norm() / bnorm } else { sol.residual_norm() };
    Ok(MaxwellEigenstrainFit { coefficients, potential, eigenstrain, stress, relative_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axisym::{AxisymForward, AxisymPolyField};
    use crate::grid::Sampling;
    use crate::tensor::SymTensor2;

    #[test]
    fn zero_stress_gives_zero_eigenstrain() {
        let mesh = BoxMesh::cube(1.0, 2).unwrap();
        let z = GridTensorField::zeros(&mesh, Sampling::Nodal);
        let (t, chk) = trivial_solution_checked(&z, &ElasticModel::tin_bronze()).unwrap();
        assert_eq!(t.max_abs(), 0.0);
        assert!(chk.warnings.is_empty());
    }

    #[test]
    fn non_equilibrated_field_warns() {
        let mesh = BoxMesh::cube(1.0, 3).unwrap();
        let s = GridTensorField::constant(&mesh, Sampling::Nodal, SymTensor2::diag(1e8, 0.0, 0.0));
        let (_, chk) = trivial_solution_checked(&s, &ElasticModel::tin_bronze()).unwrap();
        assert!(chk.warnings.len() >= 2);
        assert!((chk.mean_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_matches_axisymmetric_elastic_strain() {
        let m = ElasticModel::tin_bronze();
        let radius: f64 = 1.5e-3;
        let l = 5;
        let s = |v: [f64; 5]| -> Vec<f64> { v.iter().enumerate().map(|(i, x)| x / radius.powi((l - 1 - i) as i32)).collect() };
        let e = AxisymPolyField::new(l, radius, s([1e-3, 0.0, -2e-4, 0.0, 1e-4]), s([3e-4, 1e-4, 0.0, 0.0, 1e-4]), s([0.0, 2e-4, 0.0, 0.0, -1e-4]))
            .unwrap();
        let fwd = AxisymForward::solve(&e, &m).unwrap();
        for k in 0..=10 {
            let r = radius * k as f64 / 10.0;
            let sig = fwd.stress_tensor_at(r);
            let triv = -m.apply_compliance(&sig);
            let el = fwd.strain_at(r);
            let expect = SymTensor2::diag(-el[0], -el[1], -el[2]);
            assert!((triv - expect).max_abs() <= 1e-12 * expect.max_abs());
        }
    }

    #[test]
    fn orthogonality_report_edge_cases() {
        let mesh = BoxMesh::cube(1.0, 3).unwrap();
        let m = ElasticModel::tin_bronze();
        let f = GridTensorField::from_fn_gauss(&mesh, |p| SymTensor2::new(p[0], p[1] * p[2], 1.0, 0.2, 0.0, p[1]));
        let z = GridTensorField::zeros(&mesh, Sampling::CellGauss);
        let r = verify_energy_orthogonality(&z, &f, &m, &mesh, Some(&f)).unwrap();
        assert_eq!(r.orthogonality_residual, 0.0);
        assert_eq!(r.recomposition_error, Some(0.0));
        let r = verify_energy_orthogonality(&f, &f, &m, &mesh, None).unwrap();
        assert!((r.orthogonality_residual - 1.0).abs() < 1e-12);
        assert!((r.orthogonality_identity - 1.0).abs() < 1e-12);
        let other = BoxMesh::cube(1.0, 4).unwrap();
        assert!(matches!(verify_energy_orthogonality(&z, &f, &m, &other, None), Err(Error::MeshMismatch)));
    }

    #[test]
    fn c_weighted_split_is_energy_orthogonal() {
        let mesh = BoxMesh::cube(1.0, 6).unwrap();
        let m = ElasticModel::inconel_718();
        let eps = GridTensorField::from_fn_gauss(&mesh, |p| {
            SymTensor2::new(1e-3 * p[0] * p[1], 2e-4, 5e-4 * p[2] * p[2], 1e-4 * p[1], 0.0, 3e-4 * p[0])
        });
        let opts = SolverOptions::default();
        let d = helmholtz_decompose_weighted(&eps, &mesh, BoundaryMode::ZeroFlux, &Weight::Stiffness(m), &opts).unwrap();
        let r = verify_energy_orthogonality(&d.potential, &d.solenoidal, &m, &mesh, Some(&eps)).unwrap();
        assert!(r.orthogonality_residual.abs() < 1e-8);
        assert!(r.recomposition_error.unwrap() < 1e-15);
        // C:sol is weakly equilibrated with zero flux up to solver tolerance
        assert!(r.stiffness_membership.interior_residual < 1e-8);
        assert!(r.stiffness_membership.boundary_residual < 1e-8);
    }
}
