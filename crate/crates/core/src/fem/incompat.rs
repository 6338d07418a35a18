//! Saint-Venant incompatibility `inc ε = ∇×(∇×ε)ᵀ` by central differences.

use crate::grid::{BoxMesh, GridTensorField, Sampling};
use crate::tensor::SymTensor2;
use crate::{Error, Result};

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `inc_ij = e_ikl e_jmn ∂_k ∂_m ε_ln` at interior nodes; boundary nodes are set to zero.
///
/// The input is sampled at the nodes (Gauss fields are averaged to nodes first).
pub fn incompatibility(eps: &GridTensorField, mesh: &BoxMesh) -> Result<GridTensorField> {
    let spec = mesh.spec();
    if eps.grid != spec {
        return Err(Error::MeshMismatch);
    }
    if spec.n.iter().any(|&n| n < 4) {
        return Err(Error::MeshTooSmall(format!("incompatibility needs at least 4 cells per axis, got {:?}", spec.n)));
    }
    let nodal = eps.to_nodal();
    let h = spec.spacing();
    let val = |i: usize, j: usize, k: usize| nodal.values[spec.node_index(i, j, k)].to_matrix();
    let mut out = vec![SymTensor2::ZERO; spec.node_count()];
    let [nx, ny, nz] = spec.n;
    for k in 1..nz {
        for j in 1..ny {
            for i in 1..nx {
                let at = |d: [isize; 3]| {
                    val((i as isize + d[0]) as usize, (j as isize + d[1]) as usize, (k as isize + d[2]) as usize)
                };
                // second derivative ∂a∂b of component (l, n)
                let d2 = |a: usize, b: usize, l: usize, n: usize| -> f64 {
                    let unit = |ax: usize, s: isize| {
                        let mut d = [0isize; 3];
                        d[ax] = s;
                        d
                    };
                    if a == b {
                        (at(unit(a, 1))[l][n] - 2.0 * at([0; 3])[l][n] + at(unit(a, -1))[l][n]) / (h[a] * h[a])
                    } else {
                        let sh = |sa: isize, sb: isize| {
                            let mut d = unit(a, sa);
                            d[b] = sb;
                            at(d)[l][n]
                        };
                        (sh(1, 1) - sh(1, -1) - sh(-1, 1) + sh(-1, -1)) / (4.0 * h[a] * h[b])
                    }
                };
                let mut m = [[0.0; 3]; 3];
                for (ii, row) in m.iter_mut().enumerate() {
                    for (jj, v) in row.iter_mut().enumerate() {
                        for kk in 0..3 {
                            for l in 0..3 {
                                let e1 = levi_civita(ii, kk, l);
                                if e1 == 0.0 {
                                    continue;
                                }
                                for mm in 0..3 {
                                    for n in 0..3 {
                                        let e2 = levi_civita(jj, mm, n);
                                        if e2 != 0.0 {
                                            *v += e1 * e2 * d2(kk, mm, l, n);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                out[spec.node_index(i, j, k)] = SymTensor2::from_matrix(&m);
            }
        }
    }
    GridTensorField::new(spec, Sampling::Nodal, out)
}
