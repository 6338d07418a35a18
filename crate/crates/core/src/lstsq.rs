//! Dense linear least squares through the singular value decomposition.
//!
//! Both fitters (axisymmetric polynomials and Maxwell potentials) share this:
//! singular values below `rcond · σ_max` are truncated, which yields the
//! minimum-norm solution when the design matrix is rank deficient.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Default relative singular-value cutoff.
pub const DEFAULT_RCOND: f64 = 1e-10;

/// Solution of `min ‖A x − b‖₂`.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: DVector<f64>,
    /// `A x − b`.
    pub residuals: DVector<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `σ_max / σ_min` over all singular values (infinite when any is zero).
    pub condition_number: f64,
    /// `(AᵀA)⁺`, restricted to the retained singular subspace.
    pub normal_inverse: DMatrix<f64>,
    /// Left singular vectors spanning the retained column space.
    pub range_basis: DMatrix<f64>,
}

impl LstsqSolution {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.norm()
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank < self.x.len()
    }

    /// Parameter standard errors, scaling `(AᵀA)⁺` by `s²` (pass 1 when rows are
    /// already divided by their uncertainties).
    pub fn standard_errors(&self, s2: f64) -> Vec<f64> {
        (0..self.x.len()).map(|i| (s2 * self.normal_inverse[(i, i)]).max(0.0).sqrt()).collect()
    }

    /// Residual variance estimate `‖r‖² / (m − rank)`.
    pub fn residual_variance(&self) -> f64 {
        let m = self.residuals.len();
        if m > self.rank {
            self.residuals.norm_squared() / (m - self.rank) as f64
        } else {
            0.0
        }
    }
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Result<LstsqSolution> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidInput(format!("design has {} rows but rhs has {}", a.nrows(), b.len())));
    }
    if a.ncols() == 0 || a.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroDesign);
    }
    if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in least-squares system".into()));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = rcond * smax;
    // nalgebra returns min(m, n) singular values; extra columns are exactly singular
    let n = a.ncols();
    let mut all_sv = sv.clone();
    all_sv.resize(n, 0.0);
    let smin = all_sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > cutoff).collect();
    let mut x = DVector::zeros(n);
    let mut normal_inverse = DMatrix::zeros(n, n);
    let mut range_basis = DMatrix::zeros(a.nrows(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let ui = u.column(i);
        let vi = v_t.row(i).transpose();
        let coef = ui.dot(b) / sv[i];
        x.axpy(coef, &vi, 1.0);
        normal_inverse += (&vi * vi.transpose()) / (sv[i] * sv[i]);
        range_basis.set_column(col, &ui);
    }
    let residuals = a * &x - b;
    Ok(LstsqSolution {
        x,
        residuals,
        singular_values: all_sv,
        rank: keep.len(),
        condition_number,
        normal_inverse,
        range_basis,
    })
}
