//! Matrix-free stiffness operator on a structured hexahedral grid and its CG solver.
//!
//! Every cell of the grid is the same box, so one 24×24 element matrix serves the
//! whole mesh. The product `K x` is gathered node by node, which keeps it parallel
//! and deterministic without assembly.

use rayon::prelude::*;

use crate::grid::{gauss_point_coords, shape_derivatives, GridSpec, GridTensorField, Sampling};
use crate::tensor::Weight;
use crate::{Error, Result};

/// 6×6 material matrix acting on engineering strain `(xx, yy, zz, 2xy, 2yz, 2xz)`.
pub fn material_matrix(weight: &Weight) -> [[f64; 6]; 6] {
    let mut d = [[0.0; 6]; 6];
    match weight {
        Weight::Identity => {
            for (i, row) in d.iter_mut().enumerate() {
                row[i] = if i < 3 { 1.0 } else { 0.5 };
            }
        }
        Weight::Stiffness(m) => {
            let lam = m.lambda();
            let mu = m.shear_modulus();
            for i in 0..3 {
                for j in 0..3 {
                    d[i][j] = if i == j { lam + 2.0 * mu } else { lam };
                }
                d[i + 3][i + 3] = mu;
            }
        }
    }
    d
}

/// Strain-displacement rows for node `a`: `B[k][i]` maps `u_i` to engineering strain `k`.
fn b_matrix(dn: [f64; 3]) -> [[f64; 3]; 6] {
    let [dx, dy, dz] = dn;
    [[dx, 0.0, 0.0], [0.0, dy, 0.0], [0.0, 0.0, dz], [dy, dx, 0.0], [0.0, dz, dy], [dz, 0.0, dx]]
}

/// Physical shape-function gradients at each Gauss point.
fn physical_gradients(h: [f64; 3]) -> [[[f64; 3]; 8]; 8] {
    let mut out = [[[0.0; 3]; 8]; 8];
    for (g, og) in out.iter_mut().enumerate() {
        let dn = shape_derivatives(gauss_point_coords(g));
        for a in 0..8 {
            for j in 0..3 {
                og[a][j] = dn[a][j] * 2.0 / h[j];
            }
        }
    }
    out
}

/// Element matrix `∫ Bᵀ D B` for one cell, row/column `3a + i`.
pub fn element_matrix(h: [f64; 3], weight: &Weight) -> Vec<f64> {
    let d = material_matrix(weight);
    let grads = physical_gradients(h);
    let jac = h[0] * h[1] * h[2] / 8.0;
    let mut ke = vec![0.0; 576];
    for grad in grads.iter() {
        let bs: Vec<[[f64; 3]; 6]> = grad.iter().map(|&dn| b_matrix(dn)).collect();
        for a in 0..8 {
            // D B_a
            let mut db = [[0.0; 3]; 6];
            for k in 0..6 {
                for i in 0..3 {
                    db[k][i] = (0..6).map(|l| d[k][l] * bs[a][l][i]).sum();
                }
            }
            for b in 0..8 {
                for i in 0..3 {
                    for j in 0..3 {
                        let v: f64 = (0..6).map(|k| bs[b][k][i] * db[k][j]).sum();
                        ke[(3 * b + i) * 24 + 3 * a + j] += v * jac;
                    }
                }
            }
        }
    }
    ke
}

/// Cells touching a node, with the node's local index in each.
fn node_cells(spec: &GridSpec, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let ijk = spec.node_ijk(node);
    (0..8).filter_map(move |a| {
        let off = [a & 1, (a >> 1) & 1, (a >> 2) & 1];
        if (0..3).any(|d| ijk[d] < off[d] || ijk[d] - off[d] >= spec.n[d]) {
            return None;
        }
        Some((spec.cell_index(ijk[0] - off[0], ijk[1] - off[1], ijk[2] - off[2]), a))
    })
}

/// Deterministic parallel dot product.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 4096;
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum())
        .collect();
    parts.iter().sum()
}

/// Symmetric stiffness operator, optionally with every boundary displacement fixed to zero.
#[derive(Debug, Clone)]
pub struct StiffnessOperator {
    spec: GridSpec,
    ke: Vec<f64>,
    fixed: Option<Vec<bool>>,
    diag: Vec<f64>,
    rigid: Vec<Vec<f64>>,
}

impl StiffnessOperator {
    pub fn new(spec: GridSpec, weight: &Weight, fix_boundary: bool) -> Self {
        let ke = element_matrix(spec.spacing(), weight);
        let n = spec.node_count();
        let fixed = fix_boundary.then(|| (0..n).map(|i| spec.is_boundary_node(i)).collect::<Vec<_>>());
        let mut diag = vec![0.0; 3 * n];
        for (node, dn) in diag.chunks_mut(3).enumerate() {
            if fixed.as_ref().is_some_and(|f| f[node]) {
                dn.iter_mut().for_each(|v| *v = 1.0);
                continue;
            }
            for (_, a) in node_cells(&spec, node) {
                for i in 0..3 {
                    dn[i] += ke[(3 * a + i) * 24 + 3 * a + i];
                }
            }
        }
        let rigid = if fix_boundary { Vec::new() } else { rigid_modes(&spec) };
        StiffnessOperator { spec, ke, fixed, diag, rigid }
    }

    pub fn dofs(&self) -> usize {
        3 * self.spec.node_count()
    }

    fn is_fixed(&self, node: usize) -> bool {
        self.fixed.as_ref().is_some_and(|f| f[node])
    }

    /// `y = K x`, with fixed rows and columns removed.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let spec = &self.spec;
        y.par_chunks_mut(3).enumerate().for_each(|(node, yn)| {
            yn.iter_mut().for_each(|v| *v = 0.0);
            if self.is_fixed(node) {
                return;
            }
            for (cell, a) in node_cells(spec, node) {
                let nodes = spec.cell_nodes(cell);
                for (b, &nb) in nodes.iter().enumerate() {
                    if self.is_fixed(nb) {
                        continue;
                    }
                    let xb = &x[3 * nb..3 * nb + 3];
                    for i in 0..3 {
                        let row = &self.ke[(3 * a + i) * 24 + 3 * b..(3 * a + i) * 24 + 3 * b + 3];
                        yn[i] += row[0] * xb[0] + row[1] * xb[1] + row[2] * xb[2];
                    }
                }
            }
        });
    }

    /// Removes the rigid-body components (no-op with fixed boundaries).
    pub fn project(&self, v: &mut [f64]) {
        for q in &self.rigid {
            let c = dot(q, v);
            v.par_iter_mut().zip(q.par_iter()).for_each(|(x, y)| *x -= c * y);
        }
    }

    /// Load vector `f_a = ∫ (W:ε) · ∇φ_a` for a Gauss-sampled field.
    pub fn load(&self, eps: &GridTensorField, weight: &Weight) -> Vec<f64> {
        let spec = &self.spec;
        let grads = physical_gradients(spec.spacing());
        let h = spec.spacing();
        let jac = h[0] * h[1] * h[2] / 8.0;
        let per_cell: Vec<[f64; 24]> = (0..spec.cell_count())
            .into_par_iter()
            .map(|c| {
                let mut fe = [0.0; 24];
                for (g, grad) in grads.iter().enumerate() {
                    let s = weight.apply(&eps.values[8 * c + g]).to_matrix();
                    for a in 0..8 {
                        for i in 0..3 {
                            fe[3 * a + i] += jac * (0..3).map(|j| s[i][j] * grad[a][j]).sum::<f64>();
                        }
                    }
                }
                fe
            })
            .collect();
        let mut f = vec![0.0; self.dofs()];
        f.par_chunks_mut(3).enumerate().for_each(|(node, fnode)| {
            if self.is_fixed(node) {
                return;
            }
            for (cell, a) in node_cells(spec, node) {
                for i in 0..3 {
                    fnode[i] += per_cell[cell][3 * a + i];
                }
            }
        });
        self.project(&mut f);
        f
    }
}

/// Weak equilibrium residual `g_a = ∫ σ·∇φ_a` of a tensor field, per node.
///
/// For a field with zero divergence and zero boundary traction every `g_a`
/// vanishes, boundary nodes included. `scale[a] = ∫ |∇φ_a|` normalises the
/// residual so that `|g_a| / (scale[a]·max|σ|)` is dimensionless.
pub fn weak_residual(field: &GridTensorField) -> (Vec<[f64; 3]>, Vec<f64>) {
    let spec = field.grid;
    let g = field.to_gauss();
    let h = spec.spacing();
    let grads = physical_gradients(h);
    let jac = h[0] * h[1] * h[2] / 8.0;
    let per_cell: Vec<([f64; 24], [f64; 8])> = (0..spec.cell_count())
        .into_par_iter()
        .map(|c| {
            let mut fe = [0.0; 24];
            let mut se = [0.0; 8];
            for (q, grad) in grads.iter().enumerate() {
                let s = g.values[8 * c + q].to_matrix();
                for a in 0..8 {
                    for i in 0..3 {
                        fe[3 * a + i] += jac * (0..3).map(|j| s[i][j] * grad[a][j]).sum::<f64>();
                    }
                    se[a] += jac * grad[a].iter().map(|v| v * v).sum::<f64>().sqrt();
                }
            }
            (fe, se)
        })
        .collect();
    (0..spec.node_count())
        .into_par_iter()
        .map(|node| {
            let mut r = [0.0; 3];
            let mut s = 0.0;
            for (cell, a) in node_cells(&spec, node) {
                for i in 0..3 {
                    r[i] += per_cell[cell].0[3 * a + i];
                }
                s += per_cell[cell].1[a];
            }
            (r, s)
        })
        .unzip()
}

/// Orthonormal rigid-body modes (three translations, three rotations) in dof space.
fn rigid_modes(spec: &GridSpec) -> Vec<Vec<f64>> {
    let n = spec.node_count();
    let mut modes: Vec<Vec<f64>> = Vec::with_capacity(6);
    for m in 0..6 {
        let mut v = vec![0.0; 3 * n];
        for node in 0..n {
            let [x, y, z] = spec.node_coords(node);
            let u = match m {
                0 => [1.0, 0.0, 0.0],
                1 => [0.0, 1.0, 0.0],
                2 => [0.0, 0.0, 1.0],
                3 => [-y, x, 0.0],
                4 => [0.0, -z, y],
                _ => [z, 0.0, -x],
            };
            v[3 * node..3 * node + 3].copy_from_slice(&u);
        }
        for q in &modes {
            let c = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let nrm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
        modes.push(v);
    }
    modes
}

/// Conjugate-gradient settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    /// Iteration cap; `None` means 20 × node count.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rel_tol: 1e-10, max_iterations: None }
    }
}

/// Convergence record of a solve.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned CG on the rigid-mode-free subspace.
pub fn conjugate_gradient(op: &StiffnessOperator, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    let n = op.dofs();
    let max_it = opts.max_iterations.unwrap_or(20 * op.spec.node_count());
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = b.to_vec();
    op.project(&mut r);
    let precondition = |r: &[f64], z: &mut Vec<f64>| {
        z.par_iter_mut().zip(r.par_iter()).zip(op.diag.par_iter()).for_each(|((z, r), d)| *z = r / d);
        if let Some(f) = &op.fixed {
            for (node, &fx) in f.iter().enumerate() {
                if fx {
                    z[3 * node..3 * node + 3].iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
        op.project(z);
    };
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    for it in 1..=max_it {
        op.apply(&p, &mut ap);
        op.project(&mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            let res = dot(&r, &r).sqrt() / bnorm;
            history.push(res);
            return Err(Error::SolverDiverged { iterations: it, residual: res, history });
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(p.par_iter()).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(ap.par_iter()).for_each(|(r, a)| *r -= alpha * a);
        let res = dot(&r, &r).sqrt() / bnorm;
        history.push(res);
        if res < opts.rel_tol {
            op.project(&mut x);
            return Ok((x, SolveStats { iterations: it, relative_residual: res }));
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(z.par_iter()).for_each(|(p, z)| *p = z + beta * *p);
    }
    let res = *history.last().unwrap_or(&f64::NAN);
    Err(Error::SolverDiverged { iterations: max_it, residual: res, history })
}

/// Gauss-sampled copy of a field after checking it lives on `spec`.
pub(crate) fn gauss_on(eps: &GridTensorField, spec: &GridSpec) -> Result<GridTensorField> {
    if eps.grid != *spec {
        return Err(Error::MeshMismatch);
    }
    Ok(match eps.sampling {
        Sampling::CellGauss => eps.clone(),
        Sampling::Nodal => eps.to_gauss(),
    })
}

/// Dense assembled matrix; only for small meshes in tests and checks.
pub fn assemble_dense(spec: &GridSpec, weight: &Weight) -> nalgebra::DMatrix<f64> {
    let ke = element_matrix(spec.spacing(), weight);
    let n = 3 * spec.node_count();
    let mut k = nalgebra::DMatrix::zeros(n, n);
    for c in 0..spec.cell_count() {
        let nodes = spec.cell_nodes(c);
        for a in 0..8 {
            for b in 0..8 {
                for i in 0..3 {
                    for j in 0..3 {
                        k[(3 * nodes[a] + i, 3 * nodes[b] + j)] += ke[(3 * a + i) * 24 + 3 * b + j];
                    }
                }
            }
        }
    }
    k
}
