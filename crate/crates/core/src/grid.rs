//! Structured box meshes and the tensor/vector fields sampled on them.
//!
//! The box is `[-L_x, L_x] × [-L_y, L_y] × [-L_z, L_z]` split into `n_x × n_y × n_z`
//! equal trilinear hexahedra. Nodes and cells are numbered lexicographically with
//! x fastest: node `(i, j, k)` has index `i + (n_x+1)·(j + (n_y+1)·k)`.
//! Inside a cell the local node `a + 2b + 4c` (a, b, c ∈ {0, 1}) sits at natural
//! coordinates `(2a-1, 2b-1, 2c-1)`; the eight Gauss points of the 2×2×2 rule use
//! the same ordering at `±1/√3`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::tensor::{SymTensor2, Weight};
use crate::{Error, Result};

pub const GAUSS_COORD: f64 = 0.577_350_269_189_625_8;

/// Natural coordinates of local node `a`.
pub fn local_node_coords(a: usize) -> [f64; 3] {
    [
        if a & 1 == 0 { -1.0 } else { 1.0 },
        if a & 2 == 0 { -1.0 } else { 1.0 },
        if a & 4 == 0 { -1.0 } else { 1.0 },
    ]
}

/// Natural coordinates of 2×2×2 Gauss point `g`.
pub fn gauss_point_coords(g: usize) -> [f64; 3] {
    local_node_coords(g).map(|c| c * GAUSS_COORD)
}

/// Trilinear shape functions at natural coordinates.
pub fn shape_functions(xi: [f64; 3]) -> [f64; 8] {
    let mut n = [0.0; 8];
    for (a, na) in n.iter_mut().enumerate() {
        let c = local_node_coords(a);
        *na = 0.125 * (1.0 + c[0] * xi[0]) * (1.0 + c[1] * xi[1]) * (1.0 + c[2] * xi[2]);
    }
    n
}

/// Derivatives of the shape functions with respect to natural coordinates.
pub fn shape_derivatives(xi: [f64; 3]) -> [[f64; 3]; 8] {
    let mut d = [[0.0; 3]; 8];
    for (a, da) in d.iter_mut().enumerate() {
        let c = local_node_coords(a);
        let f = [1.0 + c[0] * xi[0], 1.0 + c[1] * xi[1], 1.0 + c[2] * xi[2]];
        *da = [0.125 * c[0] * f[1] * f[2], 0.125 * f[0] * c[1] * f[2], 0.125 * f[0] * f[1] * c[2]];
    }
    d
}

/// Mesh dimensions; two fields live on the same mesh iff their specs are equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_size: [f64; 3],
    pub n: [usize; 3],
}

impl GridSpec {
    pub fn node_dims(&self) -> [usize; 3] {
        [self.n[0] + 1, self.n[1] + 1, self.n[2] + 1]
    }

    pub fn node_count(&self) -> usize {
        self.node_dims().iter().product()
    }

    pub fn cell_count(&self) -> usize {
        self.n.iter().product()
    }

    /// Cell edge lengths.
    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|d| 2.0 * self.half_size[d] / self.n[d] as f64)
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_size.iter().product::<f64>()
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let nd = self.node_dims();
        i + nd[0] * (j + nd[1] * k)
    }

    pub fn node_ijk(&self, idx: usize) -> [usize; 3] {
        let nd = self.node_dims();
        [idx % nd[0], (idx / nd[0]) % nd[1], idx / (nd[0] * nd[1])]
    }

    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    pub fn cell_ijk(&self, idx: usize) -> [usize; 3] {
        [idx % self.n[0], (idx / self.n[0]) % self.n[1], idx / (self.n[0] * self.n[1])]
    }

    pub fn node_coords(&self, idx: usize) -> [f64; 3] {
        let ijk = self.node_ijk(idx);
        let h = self.spacing();
        [0, 1, 2].map(|d| -self.half_size[d] + ijk[d] as f64 * h[d])
    }

    /// Global node indices of a cell in local order.
    pub fn cell_nodes(&self, cell: usize) -> [usize; 8] {
        let [i, j, k] = self.cell_ijk(cell);
        let mut out = [0; 8];
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.node_index(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
        }
        out
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 3] {
        let ijk = self.cell_ijk(cell);
        let h = self.spacing();
        [0, 1, 2].map(|d| -self.half_size[d] + (ijk[d] as f64 + 0.5) * h[d])
    }

    /// Physical position of natural coordinates inside a cell.
    pub fn map_point(&self, cell: usize, xi: [f64; 3]) -> [f64; 3] {
        let c = self.cell_center(cell);
        let h = self.spacing();
        [0, 1, 2].map(|d| c[d] + 0.5 * h[d] * xi[d])
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let ijk = self.node_ijk(idx);
        (0..3).any(|d| ijk[d] == 0 || ijk[d] == self.n[d])
    }

    /// Whether `p` is inside the closed box (with a relative slack).
    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|d| p[d].abs() <= self.half_size[d] * (1.0 + 1e-12))
    }

    /// Cell containing `p` and the natural coordinates of `p` in it.
    pub fn locate(&self, p: [f64; 3]) -> Option<(usize, [f64; 3])> {
        if !self.contains(p) {
            return None;
        }
        let h = self.spacing();
        let mut ijk = [0usize; 3];
        let mut xi = [0.0; 3];
        for d in 0..3 {
            let s = (p[d] + self.half_size[d]) / h[d];
            let i = (s.floor().max(0.0) as usize).min(self.n[d] - 1);
            ijk[d] = i;
            xi[d] = 2.0 * (s - i as f64) - 1.0;
        }
        Some((self.cell_index(ijk[0], ijk[1], ijk[2]), xi))
    }
}

/// Structured hexahedral mesh of a centred box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMesh {
    spec: GridSpec,
    pub nodes: Vec<[f64; 3]>,
    pub cells: Vec<[usize; 8]>,
}

impl BoxMesh {
    /// Box `[-L, L]` per axis with `n` cells per axis; every `n_i` must be at least 2.
    pub fn new(half_size: [f64; 3], n: [usize; 3]) -> Result<Self> {
        if n.iter().any(|&v| v < 2) {
            return Err(Error::InvalidInput(format!("need at least 2 cells per axis, got {n:?}")));
        }
        if half_size.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidInput(format!("half sizes must be positive, got {half_size:?}")));
        }
        let spec = GridSpec { half_size, n };
        let nodes = (0..spec.node_count()).map(|i| spec.node_coords(i)).collect();
        let cells = (0..spec.cell_count()).map(|c| spec.cell_nodes(c)).collect();
        Ok(BoxMesh { spec, nodes, cells })
    }

    /// Cube of half-size `l` with `n` cells per axis.
    pub fn cube(l: f64, n: usize) -> Result<Self> {
        Self::new([l; 3], [n; 3])
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spec.spacing()
    }

    pub fn half_size(&self) -> [f64; 3] {
        self.spec.half_size
    }

    pub fn n(&self) -> [usize; 3] {
        self.spec.n
    }

    /// Physical coordinates of every 2×2×2 Gauss point, cell-major.
    pub fn gauss_points(&self) -> Vec<[f64; 3]> {
        (0..self.cell_count())
            .flat_map(|c| (0..8).map(move |g| self.spec.map_point(c, gauss_point_coords(g))))
            .collect()
    }
}

/// Build a box mesh (free-function form of [`BoxMesh::new`]).
pub fn build_box_mesh(half_size: [f64; 3], n: [usize; 3]) -> Result<BoxMesh> {
    BoxMesh::new(half_size, n)
}

/// Where the samples of a tensor field live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// One value per mesh node, trilinear in between.
    Nodal,
    /// Eight values per cell at the 2×2×2 Gauss points, cell-major.
    CellGauss,
}

impl Sampling {
    pub fn len(&self, spec: &GridSpec) -> usize {
        match self {
            Sampling::Nodal => spec.node_count(),
            Sampling::CellGauss => 8 * spec.cell_count(),
        }
    }
}

/// Per-cell quadrature rules for field integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Gauss1,
    Gauss2,
    Gauss3,
}

impl QuadratureRule {
    /// Natural-coordinate points and weights (weights sum to 8).
    pub fn points(&self) -> Vec<([f64; 3], f64)> {
        let line: Vec<(f64, f64)> = match self {
            QuadratureRule::Gauss1 => vec![(0.0, 2.0)],
            QuadratureRule::Gauss2 => vec![(-GAUSS_COORD, 1.0), (GAUSS_COORD, 1.0)],
            QuadratureRule::Gauss3 => {
                let p = (0.6_f64).sqrt();
                vec![(-p, 5.0 / 9.0), (0.0, 8.0 / 9.0), (p, 5.0 / 9.0)]
            }
        };
        let mut out = Vec::with_capacity(line.len().pow(3));
        for &(z, wz) in &line {
            for &(y, wy) in &line {
                for &(x, wx) in &line {
                    out.push(([x, y, z], wx * wy * wz));
                }
            }
        }
        out
    }
}

/// Displacement-like field, one 3-vector per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVectorField {
    pub grid: GridSpec,
    pub values: Vec<[f64; 3]>,
}

impl GridVectorField {
    pub fn zeros(mesh: &BoxMesh) -> Self {
        GridVectorField { grid: mesh.spec(), values: vec![[0.0; 3]; mesh.node_count()] }
    }

    pub fn from_fn(mesh: &BoxMesh, f: impl Fn([f64; 3]) -> [f64; 3] + Sync + Send) -> Self {
        GridVectorField { grid: mesh.spec(), values: mesh.nodes.par_iter().map(|&p| f(p)).collect() }
    }

    /// Trilinear interpolation at a point inside the box.
    pub fn eval(&self, p: [f64; 3]) -> Option<[f64; 3]> {
        let (cell, xi) = self.grid.locate(p)?;
        let n = shape_functions(xi);
        let nodes = self.grid.cell_nodes(cell);
        let mut out = [0.0; 3];
        for a in 0..8 {
            for d in 0..3 {
                out[d] += n[a] * self.values[nodes[a]][d];
            }
        }
        Some(out)
    }

    /// Symmetric gradient of the trilinear interpolant at the Gauss points.
    pub fn symmetric_gradient(&self) -> GridTensorField {
        let spec = self.grid;
        let h = spec.spacing();
        let values = (0..spec.cell_count())
            .into_par_iter()
            .flat_map_iter(|c| {
                let nodes = spec.cell_nodes(c);
                (0..8).map(move |g| {
                    let dn = shape_derivatives(gauss_point_coords(g));
                    let mut grad = [[0.0; 3]; 3];
                    for a in 0..8 {
                        let u = self.values[nodes[a]];
                        for j in 0..3 {
                            let dnj = dn[a][j] * 2.0 / h[j];
                            for i in 0..3 {
                                grad[i][j] += u[i] * dnj;
                            }
                        }
                    }
                    SymTensor2::from_matrix(&grad)
                })
            })
            .collect();
        GridTensorField { grid: spec, sampling: Sampling::CellGauss, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter()).fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Symmetric tensor field sampled on a box mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTensorField {
    pub grid: GridSpec,
    pub sampling: Sampling,
    pub values: Vec<SymTensor2>,
}

impl GridTensorField {
    pub fn new(grid: GridSpec, sampling: Sampling, values: Vec<SymTensor2>) -> Result<Self> {
        if values.len() != sampling.len(&grid) {
            return Err(Error::InvalidInput(format!(
                "{:?} field on {:?} needs {} values, got {}",
                sampling,
                grid.n,
                sampling.len(&grid),
                values.len()
            )));
        }
        Ok(GridTensorField { grid, sampling, values })
    }

    pub fn zeros(mesh: &BoxMesh, sampling: Sampling) -> Self {
        let spec = mesh.spec();
        GridTensorField { grid: spec, sampling, values: vec![SymTensor2::ZERO; sampling.len(&spec)] }
    }

    pub fn constant(mesh: &BoxMesh, sampling: Sampling, t: SymTensor2) -> Self {
        let spec = mesh.spec();
        GridTensorField { grid: spec, sampling, values: vec![t; sampling.len(&spec)] }
    }

    /// Samples `f` at the nodes.
    pub fn from_fn_nodal(mesh: &BoxMesh, f: impl Fn([f64; 3]) -> SymTensor2 + Sync + Send) -> Self {
        GridTensorField {
            grid: mesh.spec(),
            sampling: Sampling::Nodal,
            values: mesh.nodes.par_iter().map(|&p| f(p)).collect(),
        }
    }

    /// Samples `f` at the Gauss points.
    pub fn from_fn_gauss(mesh: &BoxMesh, f: impl Fn([f64; 3]) -> SymTensor2 + Sync + Send) -> Self {
        GridTensorField {
            grid: mesh.spec(),
            sampling: Sampling::CellGauss,
            values: mesh.gauss_points().par_iter().map(|&p| f(p)).collect(),
        }
    }

    /// Physical coordinates of each sample.
    pub fn sample_points(&self) -> Vec<[f64; 3]> {
        match self.sampling {
            Sampling::Nodal => (0..self.grid.node_count()).map(|i| self.grid.node_coords(i)).collect(),
            Sampling::CellGauss => (0..self.grid.cell_count())
                .flat_map(|c| (0..8).map(move |g| self.grid.map_point(c, gauss_point_coords(g))))
                .collect(),
        }
    }

    /// Value at natural coordinates `xi` of `cell`.
    ///
    /// Nodal fields use the trilinear shape functions; Gauss fields use the
    /// trilinear Lagrange interpolant through the eight Gauss points.
    pub fn eval_in_cell(&self, cell: usize, xi: [f64; 3]) -> SymTensor2 {
        match self.sampling {
            Sampling::Nodal => {
                let n = shape_functions(xi);
                let nodes = self.grid.cell_nodes(cell);
                let mut acc = [0.0; 6];
                for a in 0..8 {
                    let v = self.values[nodes[a]].to_array();
                    for c in 0..6 {
                        acc[c] += n[a] * v[c];
                    }
                }
                SymTensor2::from_array(acc)
            }
            Sampling::CellGauss => {
                let n = shape_functions(xi.map(|x| x / GAUSS_COORD));
                let base = 8 * cell;
                let mut acc = [0.0; 6];
                for g in 0..8 {
                    let v = self.values[base + g].to_array();
                    for c in 0..6 {
                        acc[c] += n[g] * v[c];
                    }
                }
                SymTensor2::from_array(acc)
            }
        }
    }

    /// Value at a physical point, `None` outside the box.
    pub fn eval(&self, p: [f64; 3]) -> Option<SymTensor2> {
        let (cell, xi) = self.grid.locate(p)?;
        Some(self.eval_in_cell(cell, xi))
    }

    /// Values at the Gauss points (identity for Gauss fields).
    pub fn to_gauss(&self) -> GridTensorField {
        match self.sampling {
            Sampling::CellGauss => self.clone(),
            Sampling::Nodal => {
                let values = (0..self.grid.cell_count())
                    .into_par_iter()
                    .flat_map_iter(|c| (0..8).map(move |g| self.eval_in_cell(c, gauss_point_coords(g))))
                    .collect();
                GridTensorField { grid: self.grid, sampling: Sampling::CellGauss, values }
            }
        }
    }

    /// Nodal values by averaging each adjacent cell's interpolant at the node.
    pub fn to_nodal(&self) -> GridTensorField {
        match self.sampling {
            Sampling::Nodal => self.clone(),
            Sampling::CellGauss => {
                let spec = self.grid;
                let values = (0..spec.node_count())
                    .into_par_iter()
                    .map(|node| {
                        let ijk = spec.node_ijk(node);
                        let mut acc = SymTensor2::ZERO;
                        let mut count = 0.0;
                        for a in 0..8 {
                            let off = [a & 1, (a >> 1) & 1, (a >> 2) & 1];
                            // cell whose local node `a` is this node
                            if (0..3).any(|d| ijk[d] < off[d] || ijk[d] - off[d] >= spec.n[d]) {
                                continue;
                            }
                            let cell = spec.cell_index(ijk[0] - off[0], ijk[1] - off[1], ijk[2] - off[2]);
                            acc += self.eval_in_cell(cell, local_node_coords(a));
                            count += 1.0;
                        }
                        acc.scale(1.0 / count)
                    })
                    .collect();
                GridTensorField { grid: spec, sampling: Sampling::Nodal, values }
            }
        }
    }

    pub fn map(&self, f: impl Fn(&SymTensor2) -> SymTensor2 + Sync + Send) -> GridTensorField {
        GridTensorField { grid: self.grid, sampling: self.sampling, values: self.values.par_iter().map(f).collect() }
    }

    /// Component-wise combination of two fields with identical layout.
    pub fn zip_with(
        &self,
        other: &GridTensorField,
        f: impl Fn(&SymTensor2, &SymTensor2) -> SymTensor2 + Sync + Send,
    ) -> Result<GridTensorField> {
        let (a, b) = self.aligned(other)?;
        Ok(GridTensorField {
            grid: a.grid,
            sampling: a.sampling,
            values: a.values.par_iter().zip(b.values.par_iter()).map(|(x, y)| f(x, y)).collect(),
        })
    }

    pub fn add(&self, other: &GridTensorField) -> Result<GridTensorField> {
        self.zip_with(other, |a, b| *a + *b)
    }

    pub fn sub(&self, other: &GridTensorField) -> Result<GridTensorField> {
        self.zip_with(other, |a, b| *a - *b)
    }

    pub fn scale(&self, s: f64) -> GridTensorField {
        self.map(|t| t.scale(s))
    }

    /// Largest absolute component over all samples.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, t| m.max(t.max_abs()))
    }

    /// Brings two fields to a common sampling (Gauss if they differ).
    fn aligned<'a>(
        &'a self,
        other: &'a GridTensorField,
    ) -> Result<(std::borrow::Cow<'a, GridTensorField>, std::borrow::Cow<'a, GridTensorField>)> {
        use std::borrow::Cow;
        if self.grid != other.grid {
            return Err(Error::MeshMismatch);
        }
        if self.sampling == other.sampling {
            Ok((Cow::Borrowed(self), Cow::Borrowed(other)))
        } else {
            Ok((Cow::Owned(self.to_gauss()), Cow::Owned(other.to_gauss())))
        }
    }
}

/// `∫_Ω (W:a):b dV` with per-cell quadrature.
///
/// Cell contributions are computed in parallel and summed sequentially in cell
/// order, so the result does not depend on the thread count.
pub fn inner_product(a: &GridTensorField, b: &GridTensorField, weight: Weight, quad: QuadratureRule) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::MeshMismatch);
    }
    let spec = a.grid;
    if spec.cell_count() == 0 {
        return Err(Error::EmptyMesh);
    }
    let h = spec.spacing();
    let jac = h[0] * h[1] * h[2] / 8.0;
    let pts = quad.points();
    let direct_a = a.sampling == Sampling::CellGauss && quad == QuadratureRule::Gauss2;
    let direct_b = b.sampling == Sampling::CellGauss && quad == QuadratureRule::Gauss2;
    let per_cell: Vec<f64> = (0..spec.cell_count())
        .into_par_iter()
        .map(|c| {
            let mut acc = 0.0;
            for (q, (xi, w)) in pts.iter().enumerate() {
                let va = if direct_a { a.values[8 * c + q] } else { a.eval_in_cell(c, *xi) };
                let vb = if direct_b { b.values[8 * c + q] } else { b.eval_in_cell(c, *xi) };
                acc += w * weight.apply(&va).ddot(&vb);
            }
            acc * jac
        })
        .collect();
    Ok(per_cell.iter().sum())
}

/// `⟨a,b⟩ / (‖a‖‖b‖)` under the given weight; zero when either norm vanishes.
pub fn normalized_inner_product(a: &GridTensorField, b: &GridTensorField, weight: Weight) -> Result<f64> {
    let q = QuadratureRule::Gauss2;
    let ab = inner_product(a, b, weight, q)?;
    let aa = inner_product(a, a, weight, q)?;
    let bb = inner_product(b, b, weight, q)?;
    let denom = (aa * bb).sqrt();
    Ok(if denom > 0.0 { ab / denom } else { 0.0 })
}

/// Volume average of a tensor field.
pub fn mean_stress(s: &GridTensorField) -> Result<SymTensor2> {
    let spec = s.grid;
    if spec.cell_count() == 0 {
        return Err(Error::EmptyMesh);
    }
    let g = s.to_gauss();
    let h = spec.spacing();
    let jac = h[0] * h[1] * h[2] / 8.0;
    let per_cell: Vec<SymTensor2> = g
        .values
        .par_chunks(8)
        .map(|c| c.iter().fold(SymTensor2::ZERO, |acc, t| acc + *t))
        .collect();
    let total = per_cell.iter().fold(SymTensor2::ZERO, |acc, t| acc + *t);
    Ok(total.scale(jac / spec.volume()))
}

/// L² norm of a field, `sqrt(∫ a:a)`.
pub fn l2_norm(a: &GridTensorField) -> f64 {
    inner_product(a, a, Weight::Identity, QuadratureRule::Gauss2).map(f64::sqrt).unwrap_or(0.0)
}
