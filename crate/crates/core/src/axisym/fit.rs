//! Least-squares inverse eigenstrain fits for axisymmetric profiles.
//!
//! Parameters are coefficients scaled to the normalised radius, `f̂_i = f_i R^{l-i}`,
//! so every column of the design matrix carries stresses of comparable size.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AxisymForward, AxisymPolyField, AxisymStressProfile};
use crate::lstsq::{self, DEFAULT_RCOND};
use crate::tensor::ElasticModel;
use crate::{Error, Result};

/// Options for [`fit_stress`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Restrict the search to the orthogonal complement of the null space.
    pub exclude_null: bool,
    /// Force every `r¹` coefficient to zero.
    pub zero_linear: bool,
    /// Relative singular-value cutoff.
    pub rcond: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { exclude_null: true, zero_linear: false, rcond: DEFAULT_RCOND }
    }
}

/// Outcome of a linear eigenstrain fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub labels: Vec<String>,
    /// Normalised coefficients, one per label.
    pub parameters: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// `model − measured` per sample and component (Pa).
    pub residuals: Vec<[f64; 3]>,
    /// Unweighted residual norm (Pa).
    pub residual_norm: f64,
    /// Residual norm after dividing each row by its uncertainty.
    pub weighted_residual_norm: f64,
    pub rms_residual: f64,
    pub max_abs_measured: f64,
    pub condition_number: f64,
    pub rank: usize,
    pub weighted: bool,
    pub warnings: Vec<String>,
}

impl FitReport {
    /// Residual norm relative to the measured stress scale.
    pub fn relative_residual(&self) -> f64 {
        let n = (3 * self.residuals.len()) as f64;
        if self.max_abs_measured > 0.0 {
            self.residual_norm / (self.max_abs_measured * n.sqrt())
        } else {
            self.residual_norm
        }
    }
}

/// Linear map from normalised parameters to eigenstrain fields.
struct Basis {
    labels: Vec<String>,
    fields: Vec<AxisymPolyField>,
}

impl Basis {
    fn new(l: usize, radius: f64, opts: &FitOptions) -> Result<Basis> {
        if l < 2 {
            return Err(Error::InvalidInput(format!("polynomial length l must be at least 2, got {l}")));
        }
        let scale = |i: usize| radius.powi(-((l - i) as i32));
        let linear = |i: usize| opts.zero_linear && l - i == 1;
        let mut labels = Vec::new();
        let mut fields = Vec::new();
        if opts.exclude_null {
            for i in 1..l {
                if linear(i) {
                    continue;
                }
                let mut f = vec![0.0; l];
                f[i - 1] = scale(i);
                f[l - 1] = -1.0;
                fields.push(AxisymPolyField::solenoidal_from_f(radius, f)?);
                labels.push(format!("f{i}_hat"));
            }
            for i in 1..l {
                if linear(i) {
                    continue;
                }
                let mut h = vec![0.0; l];
                h[i - 1] = scale(i);
                h[l - 1] = -2.0 / (l - i + 2) as f64;
                fields.push(AxisymPolyField::new(l, radius, vec![0.0; l], vec![0.0; l], h)?);
                labels.push(format!("h{i}_hat"));
            }
        } else {
            for i in 1..l {
                if linear(i) {
                    continue;
                }
                let mut f = vec![0.0; l];
                f[i - 1] = scale(i);
                fields.push(AxisymPolyField::new(l, radius, f.clone(), vec![0.0; l], vec![0.0; l])?);
                labels.push(format!("f{i}_hat"));
                fields.push(AxisymPolyField::new(l, radius, vec![0.0; l], f, vec![0.0; l])?);
                labels.push(format!("g{i}_hat"));
            }
            let mut c = vec![0.0; l];
            c[l - 1] = 1.0;
            fields.push(AxisymPolyField::new(l, radius, c.clone(), c, vec![0.0; l])?);
            labels.push(format!("fg{l}"));
            for i in 1..=l {
                if linear(i) {
                    continue;
                }
                let mut h = vec![0.0; l];
                h[i - 1] = scale(i);
                fields.push(AxisymPolyField::new(l, radius, vec![0.0; l], vec![0.0; l], h)?);
                labels.push(format!("h{i}_hat"));
            }
        }
        Ok(Basis { labels, fields })
    }

    fn len(&self) -> usize {
        self.fields.len()
    }

    /// Unweighted design matrix, rows ordered `(k, rr), (k, θθ), (k, zz)`.
    fn design(&self, r: &[f64], m: &ElasticModel) -> Result<DMatrix<f64>> {
        let mut a = DMatrix::zeros(3 * r.len(), self.len());
        for (j, field) in self.fields.iter().enumerate() {
            let fwd = AxisymForward::solve(field, m)?;
            for (k, &x) in r.iter().enumerate() {
                let s = fwd.stress_at(x);
                for c in 0..3 {
                    a[(3 * k + c, j)] = s[c];
                }
            }
        }
        Ok(a)
    }

    fn field(&self, p: &[f64]) -> AxisymPolyField {
        let mut out = self.fields[0].scale(p[0]);
        for (fj, pj) in self.fields.iter().zip(p).skip(1) {
            out = out.add(&fj.scale(*pj)).expect("basis fields share order and radius");
        }
        out
    }
}

impl AxisymPolyField {
    /// Orthogonal-complement field from a full `f` vector (`g_i = (l−i+1) f_i`, `h = 0`).
    pub(crate) fn solenoidal_from_f(radius: f64, f: Vec<f64>) -> Result<AxisymPolyField> {
        let l = f.len();
        let g = f.iter().enumerate().map(|(i, fi)| (l - i) as f64 * fi).collect();
        AxisymPolyField::new(l, radius, f, g, vec![0.0; l])
    }
}

fn row_weights(n: usize, uncertainty: &Option<[Vec<f64>; 3]>) -> DVector<f64> {
    DVector::from_fn(3 * n, |row, _| match uncertainty {
        Some(u) => 1.0 / u[row % 3][row / 3],
        None => 1.0,
    })
}

fn measured_vector(p: &AxisymStressProfile) -> DVector<f64> {
    DVector::from_fn(3 * p.len(), |row, _| p.at(row / 3)[row % 3])
}

#[allow(clippy::too_many_arguments)]
fn make_report(
    basis: &Basis,
    sol: &lstsq::LstsqSolution,
    a: &DMatrix<f64>,
    measured: &DVector<f64>,
    weights: &DVector<f64>,
    weighted: bool,
    mut warnings: Vec<String>,
) -> FitReport {
    let model = a * &sol.x;
    let diff = &model - measured;
    let n = measured.len() / 3;
    let residuals = (0..n).map(|k| [diff[3 * k], diff[3 * k + 1], diff[3 * k + 2]]).collect();
    let weighted_residual_norm = diff.component_mul(weights).norm();
    let s2 = if weighted { 1.0 } else { sol.residual_variance() };
    if sol.rank_deficient() {
        warnings.push(format!(
            "design matrix is rank deficient ({} of {} parameters resolved, condition {:.3e}); minimum-norm solution returned",
            sol.rank,
            basis.len(),
            sol.condition_number
        ));
    }
    FitReport {
        labels: basis.labels.clone(),
        parameters: sol.x.iter().copied().collect(),
        standard_errors: sol.standard_errors(s2),
        residual_norm: diff.norm(),
        weighted_residual_norm,
        rms_residual: diff.norm() / (diff.len() as f64).sqrt(),
        max_abs_measured: measured.amax(),
        residuals,
        condition_number: sol.condition_number,
        rank: sol.rank,
        weighted,
        warnings,
    }
}

/// Polynomial eigenstrain minimising the (optionally weighted) stress misfit.
pub fn fit_stress(
    p: &AxisymStressProfile,
    l: usize,
    m: &ElasticModel,
    radius: f64,
    opts: &FitOptions,
) -> Result<(AxisymPolyField, FitReport)> {
    p.check_radius(radius)?;
    let basis = Basis::new(l, radius, opts)?;
    if 3 * p.len() < basis.len() {
        return Err(Error::InvalidInput(format!(
            "{} stress values cannot determine {} coefficients",
            3 * p.len(),
            basis.len()
        )));
    }
    let a = basis.design(&p.r, m)?;
    let w = row_weights(p.len(), &p.uncertainty);
    let b = measured_vector(p);
    let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * w[i]);
    let bw = b.component_mul(&w);
    let sol = lstsq::solve(&aw, &bw, opts.rcond)?;
    let e = basis.field(sol.x.as_slice());
    let report = make_report(&basis, &sol, &a, &b, &w, p.uncertainty.is_some(), Vec::new());
    Ok((e, report))
}

/// Reference lattice spacing polynomial `d₀(r) = Σ c_j (r/R)^j`, in the length unit of the lattice data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D0Poly {
    pub order: usize,
    pub c: Vec<f64>,
    pub d0_ref: f64,
    pub radius: f64,
}

impl D0Poly {
    pub fn constant(order: usize, d0_ref: f64, radius: f64) -> D0Poly {
        let mut c = vec![0.0; order + 1];
        c[0] = d0_ref;
        D0Poly { order, c, d0_ref, radius }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let rho = r / self.radius;
        self.c.iter().rev().fold(0.0, |acc, v| acc * rho + v)
    }

    /// Smallest value on a fine sampling of `[0, R]`.
    pub fn min_on_domain(&self) -> f64 {
        (0..=200).map(|k| self.eval(self.radius * k as f64 / 200.0)).fold(f64::INFINITY, f64::min)
    }
}

/// Lattice spacings per direction at each radius (any consistent length unit; radii in m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeProfile {
    pub r: Vec<f64>,
    pub d_rr: Vec<f64>,
    pub d_tt: Vec<f64>,
    pub d_zz: Vec<f64>,
    /// Stress-space uncertainties (Pa) used as row weights.
    pub uncertainty: Option<[Vec<f64>; 3]>,
}

impl LatticeProfile {
    pub fn new(
        r: Vec<f64>,
        d_rr: Vec<f64>,
        d_tt: Vec<f64>,
        d_zz: Vec<f64>,
        uncertainty: Option<[Vec<f64>; 3]>,
    ) -> Result<Self> {
        let n = r.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty lattice profile".into()));
        }
        if d_rr.len() != n || d_tt.len() != n || d_zz.len() != n {
            return Err(Error::InvalidInput("lattice columns differ in length from radii".into()));
        }
        if [&d_rr, &d_tt, &d_zz].iter().any(|c| c.iter().any(|d| !(d.is_finite() && *d > 0.0))) {
            return Err(Error::InvalidInput("lattice spacings must be positive".into()));
        }
        let r = r.into_iter().map(f64::abs).collect();
        Ok(LatticeProfile { r, d_rr, d_tt, d_zz, uncertainty })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn d(&self, k: usize) -> [f64; 3] {
        [self.d_rr[k], self.d_tt[k], self.d_zz[k]]
    }

    /// Stress implied by the strains `(d − d₀)/d₀`.
    pub fn stress_profile(&self, d0: &D0Poly, m: &ElasticModel) -> Result<AxisymStressProfile> {
        let (mut srr, mut stt, mut szz) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..self.len() {
            let d0k = d0.eval(self.r[k]);
            let e = self.d(k).map(|d| (d - d0k) / d0k);
            let s = diag_stiffness(m, e);
            srr.push(s[0]);
            stt.push(s[1]);
            szz.push(s[2]);
        }
        AxisymStressProfile::new(self.r.clone(), srr, stt, szz, self.uncertainty.clone())
    }
}

fn diag_stiffness(m: &ElasticModel, e: [f64; 3]) -> [f64; 3] {
    let nu = m.poisson_ratio();
    let k = m.youngs_modulus() / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let tr = e[0] + e[1] + e[2];
    e.map(|x| k * ((1.0 - 2.0 * nu) * x + nu * tr))
}

/// Options for [`fit_with_d0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct D0Options {
    pub fit: FitOptions,
    pub max_iterations: usize,
    pub step_tol: f64,
    pub cost_tol: f64,
    pub lambda0: f64,
}

impl Default for D0Options {
    fn default() -> Self {
        D0Options { fit: FitOptions::default(), max_iterations: 200, step_tol: 1e-10, cost_tol: 1e-12, lambda0: 1e-3 }
    }
}

/// Outcome of the joint eigenstrain and `d₀` fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D0FitReport {
    pub fit: FitReport,
    pub iterations: usize,
    pub converged: bool,
    pub final_cost: f64,
    pub cost_history: Vec<f64>,
    pub rejected_steps: usize,
}

/// Variable-projection residual and Jacobian at `d₀` coefficients `c`.
struct Projected {
    residual: DVector<f64>,
    jacobian: DMatrix<f64>,
}

fn projected(
    lat: &LatticeProfile,
    d0: &D0Poly,
    m: &ElasticModel,
    range: &DMatrix<f64>,
    w: &DVector<f64>,
) -> Projected {
    let n = lat.len();
    let p = d0.c.len();
    let mut sw = DVector::zeros(3 * n);
    let mut ds = DMatrix::zeros(3 * n, p);
    for k in 0..n {
        let d0k = d0.eval(lat.r[k]);
        let dk = lat.d(k);
        let s = diag_stiffness(m, dk.map(|d| (d - d0k) / d0k));
        let rho = lat.r[k] / d0.radius;
        for j in 0..p {
            let de = dk.map(|d| -d / (d0k * d0k) * rho.powi(j as i32));
            let dsj = diag_stiffness(m, de);
            for c in 0..3 {
                ds[(3 * k + c, j)] = w[3 * k + c] * dsj[c];
            }
        }
        for c in 0..3 {
            sw[3 * k + c] = w[3 * k + c] * s[c];
        }
    }
    // r = −(I − P) W σ_meas, J = −(I − P) W ∂σ_meas/∂c
    let proj = |v: &DVector<f64>| -> DVector<f64> { v - range * (range.transpose() * v) };
    let residual = -proj(&sw);
    let mut jacobian = DMatrix::zeros(3 * n, p);
    for j in 0..p {
        let col = -proj(&ds.column(j).into_owned());
        jacobian.set_column(j, &col);
    }
    Projected { residual, jacobian }
}

/// Joint fit of a polynomial eigenstrain and a radial `d₀` polynomial to lattice spacings.
///
/// The eigenstrain enters linearly and is eliminated exactly at every iterate; the
/// `d₀` coefficients are found by Levenberg-Marquardt on the projected residual.
pub fn fit_with_d0(
    lat: &LatticeProfile,
    l: usize,
    d0_order: usize,
    d0_ref: f64,
    m: &ElasticModel,
    radius: f64,
    opts: &D0Options,
) -> Result<(AxisymPolyField, D0Poly, D0FitReport)> {
    if !(d0_ref.is_finite() && d0_ref > 0.0) {
        return Err(Error::InvalidInput(format!("reference lattice spacing must be positive, got {d0_ref}")));
    }
    if lat.r.iter().any(|&r| r > radius * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput("lattice sample outside the cylinder radius".into()));
    }
    let basis = Basis::new(l, radius, &opts.fit)?;
    if 3 * lat.len() < basis.len() + d0_order + 1 {
        return Err(Error::InvalidInput("too few lattice samples for the requested orders".into()));
    }
    let a = basis.design(&lat.r, m)?;
    let w = row_weights(lat.len(), &lat.uncertainty);
    let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * w[i]);
    // range of the weighted design, from a least-squares solve with any right-hand side
    let range = lstsq::solve(&aw, &DVector::zeros(aw.nrows()), opts.fit.rcond)?.range_basis;

    let mut d0 = D0Poly::constant(d0_order, d0_ref, radius);
    let mut cur = projected(lat, &d0, m, &range, &w);
    let mut cost = cur.residual.norm_squared();
    let mut history = vec![cost];
    let mut lambda = opts.lambda0;
    let mut converged = cost == 0.0;
    let mut iterations = 0;
    let mut rejected = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jtj = cur.jacobian.transpose() * &cur.jacobian;
        let g = cur.jacobian.transpose() * &cur.residual;
        let mut accepted = false;
        // inner loop: raise damping until a step lowers the cost
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for i in 0..lhs.nrows() {
                let d = jtj[(i, i)];
                lhs[(i, i)] += lambda * if d > 0.0 { d } else { 1.0 };
            }
            let Some(step) = lhs.clone().cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 10.0;
                rejected += 1;
                continue;
            };
            let mut trial = d0.clone();
            for (ci, si) in trial.c.iter_mut().zip(step.iter()) {
                *ci += si;
            }
            if trial.min_on_domain() <= 0.0 {
                lambda *= 10.0;
                rejected += 1;
                continue;
            }
            let next = projected(lat, &trial, m, &range, &w);
            let next_cost = next.residual.norm_squared();
            if next_cost <= cost {
                let rel_step = step.norm() / DVector::from_column_slice(&d0.c).norm();
                let rel_cost = if cost > 0.0 { (cost - next_cost) / cost } else { 0.0 };
                d0 = trial;
                cur = next;
                cost = next_cost;
                history.push(cost);
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if rel_step < opts.step_tol || rel_cost < opts.cost_tol || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            rejected += 1;
        }
        if !accepted {
            break;
        }
    }

    let stress = lat.stress_profile(&d0, m)?;
    let (e, mut fit) = fit_stress(&stress, l, m, radius, &opts.fit)?;
    if !converged {
        fit.warnings.push(format!("d0 iteration did not converge after {iterations} iterations (cost {cost:.6e})"));
    }
    let report = D0FitReport { fit, iterations, converged, final_cost: cost, cost_history: history, rejected_steps: rejected };
    Ok((e, d0, report))
}
