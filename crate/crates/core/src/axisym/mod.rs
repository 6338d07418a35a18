//! Long axisymmetric cylinders with polynomial eigenstrain.
//!
//! Eigenstrain components are polynomials in the radius,
//!
//! ```text
//! ε*_rr = Σ_{i=1..l} f_i r^{l-i},   ε*_θθ = Σ g_i r^{l-i},   ε*_zz = Σ h_i r^{l-i},
//! ```
//!
//! and the radial displacement solves
//!
//! ```text
//! U'' + U'/r − U/r² = b(r),
//! b = ε*_rr' + ν/(1−ν)(ε*_θθ' + ε*_zz') + (1−2ν)/(1−ν)(ε*_rr − ε*_θθ)/r,
//! ```
//!
//! with `U(0) = 0`, `σ_rr(R) = 0`, a constant axial total strain `ε̄_zz` and zero
//! net axial force `∫ r σ_zz dr = 0`. The solution is `U = αr + U_p` with a
//! polynomial particular part, so the whole forward map is exact polynomial algebra.
//!
//! Coefficient vectors use the descending convention above: index `i-1` holds the
//! coefficient of `r^{l-i}`, so the last entry is the constant term.

mod fit;

pub use fit::{
    fit_stress, fit_with_d0, D0FitReport, D0Options, D0Poly, FitOptions, FitReport, LatticeProfile,
};

use serde::{Deserialize, Serialize};

use crate::poly::Poly1;
use crate::tensor::{ElasticModel, SymTensor2};
use crate::{Error, Result};

/// Outer diameters (mm) of the four measured probe shafts.
pub const PROBE_DIAMETERS_MM: [f64; 4] = [3.0, 2.2, 2.2, 1.6];

/// Cylinder radius (m) for one of the four probe samples (1-based).
pub fn probe_radius(sample: usize) -> Option<f64> {
    sample.checked_sub(1).and_then(|i| PROBE_DIAMETERS_MM.get(i)).map(|d| 0.5 * d * 1e-3)
}

/// Default polynomial length `l` (order-4 polynomials).
pub const DEFAULT_ORDER: usize = 5;

/// Which eigenstrain component a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Rr,
    Tt,
    Zz,
}

/// Polynomial eigenstrain on `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymPolyField {
    order: usize,
    radius: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
}

impl AxisymPolyField {
    pub fn new(order: usize, radius: f64, f: Vec<f64>, g: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput(format!("polynomial length l must be at least 2, got {order}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        for (name, v) in [("f", &f), ("g", &g), ("h", &h)] {
            if v.len() != order {
                return Err(Error::InvalidInput(format!("{name} has {} coefficients, expected {order}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} has non-finite coefficients")));
            }
        }
        Ok(AxisymPolyField { order, radius, f, g, h })
    }

    pub fn zero(order: usize, radius: f64) -> Result<Self> {
        Self::new(order, radius, vec![0.0; order], vec![0.0; order], vec![0.0; order])
    }

    /// Uniform eigenstrain `diag(rr, tt, zz)`.
    pub fn uniform(order: usize, radius: f64, rr: f64, tt: f64, zz: f64) -> Result<Self> {
        let mut e = Self::zero(order, radius)?;
        e.f[order - 1] = rr;
        e.g[order - 1] = tt;
        e.h[order - 1] = zz;
        Ok(e)
    }

    /// Null field `ε*_rr = d(r ε*_θθ)/dr`, `ε*_θθ = Σ g_i r^{l-i}`, `ε*_zz = ε̄`.
    pub fn null_field(radius: f64, g: Vec<f64>, eps_zz_bar: f64) -> Result<Self> {
        let l = g.len();
        let f = g.iter().enumerate().map(|(i, gi)| (l - i) as f64 * gi).collect();
        let mut h = vec![0.0; l];
        if let Some(last) = h.last_mut() {
            *last = eps_zz_bar;
        }
        Self::new(l, radius, f, g, h)
    }

    /// Field orthogonal to the null space, from free `f_1..f_{l-1}` and `h_1..h_{l-1}`.
    pub fn solenoidal(radius: f64, f_free: &[f64], h_free: &[f64]) -> Result<Self> {
        if f_free.len() != h_free.len() {
            return Err(Error::InvalidInput("f and h free coefficient counts differ".into()));
        }
        let l = f_free.len() + 1;
        let mut f = f_free.to_vec();
        let mut h = h_free.to_vec();
        let f_l: f64 = -f_free.iter().enumerate().map(|(i, fi)| fi * radius.powi((l - 1 - i) as i32)).sum::<f64>();
        let h_l: f64 = -2.0
            * h_free
                .iter()
                .enumerate()
                .map(|(i, hi)| hi * radius.powi((l - 1 - i) as i32) / (l + 1 - i) as f64)
                .sum::<f64>();
        f.push(f_l);
        h.push(h_l);
        let g = f.iter().enumerate().map(|(i, fi)| (l - i) as f64 * fi).collect();
        Self::new(l, radius, f, g, h)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn coefficients(&self, c: Component) -> &[f64] {
        match c {
            Component::Rr => &self.f,
            Component::Tt => &self.g,
            Component::Zz => &self.h,
        }
    }

    pub fn coefficients_mut(&mut self, c: Component) -> &mut [f64] {
        match c {
            Component::Rr => &mut self.f,
            Component::Tt => &mut self.g,
            Component::Zz => &mut self.h,
        }
    }

    /// Ascending-power polynomial of one component.
    pub fn poly(&self, c: Component) -> Poly1 {
        Poly1::new(self.coefficients(c).iter().rev().copied().collect())
    }

    /// `(ε*_rr, ε*_θθ, ε*_zz)` at radius `r`.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        [Component::Rr, Component::Tt, Component::Zz].map(|c| self.poly(c).eval(r))
    }

    /// All coefficients concatenated `[f, g, h]`.
    pub fn flat(&self) -> Vec<f64> {
        self.f.iter().chain(&self.g).chain(&self.h).copied().collect()
    }

    /// Coefficients scaled to the normalised radius `ρ = r/R` (`f_i R^{l-i}`).
    pub fn normalized_flat(&self) -> Vec<f64> {
        let l = self.order;
        let scale = |v: &Vec<f64>| -> Vec<f64> {
            v.iter().enumerate().map(|(i, x)| x * self.radius.powi((l - 1 - i) as i32)).collect()
        };
        let mut out = scale(&self.f);
        out.extend(scale(&self.g));
        out.extend(scale(&self.h));
        out
    }

    /// Whether every coefficient of `r¹` is zero.
    pub fn has_no_linear_terms(&self) -> bool {
        let i = self.order - 2;
        self.f[i] == 0.0 && self.g[i] == 0.0 && self.h[i] == 0.0
    }

    fn check_compatible(&self, o: &AxisymPolyField) -> Result<()> {
        if self.order != o.order || self.radius != o.radius {
            return Err(Error::InvalidInput("eigenstrain fields differ in order or radius".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &AxisymPolyField) -> Result<AxisymPolyField> {
        self.check_compatible(o)?;
        let zip = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(AxisymPolyField {
            order: self.order,
            radius: self.radius,
            f: zip(&self.f, &o.f),
            g: zip(&self.g, &o.g),
            h: zip(&self.h, &o.h),
        })
    }

    pub fn scale(&self, s: f64) -> AxisymPolyField {
        let sc = |a: &Vec<f64>| a.iter().map(|x| x * s).collect();
        AxisymPolyField { order: self.order, radius: self.radius, f: sc(&self.f), g: sc(&self.g), h: sc(&self.h) }
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.flat().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Constant-term mismatch `f_l − g_l` after tolerance; `None` if it is effectively zero.
    fn axis_mismatch(&self) -> Option<f64> {
        let (fl, gl) = (self.f[self.order - 1], self.g[self.order - 1]);
        let d = fl - gl;
        if d.abs() <= 1e-12 * fl.abs().max(gl.abs()) {
            None
        } else {
            Some(d)
        }
    }
}

/// Coefficients `b_i` of the driving term, `b = Σ_{i=1..l-1} b_i r^{l-1-i}`.
///
/// Requires `f_l = g_l`; otherwise `(ε*_rr − ε*_θθ)/r` has an `r^{-1}` term.
pub fn build_rhs(e: &AxisymPolyField, m: &ElasticModel) -> Result<Vec<f64>> {
    let asc = rhs_poly(e, m)?;
    let l = e.order;
    Ok((1..l).map(|i| asc.coef(l - 1 - i)).collect())
}

fn rhs_poly(e: &AxisymPolyField, m: &ElasticModel) -> Result<Poly1> {
    if let Some(d) = e.axis_mismatch() {
        return Err(Error::NonPolynomialRhs(format!(
            "constant terms of ε*_rr and ε*_θθ differ by {d:e}; the field is singular at the axis"
        )));
    }
    let nu = m.poisson_ratio();
    let f = e.poly(Component::Rr);
    let g = e.poly(Component::Tt);
    let h = e.poly(Component::Zz);
    let a = nu / (1.0 - nu);
    let c = (1.0 - 2.0 * nu) / (1.0 - nu);
    let diff_over_r = (&f - &g).div_x();
    let b = &(&f.derivative() + &(a * &(&g.derivative() + &h.derivative()))) + &(c * &diff_over_r);
    let mut coeffs = b.c;
    coeffs.resize(e.order - 1, 0.0);
    Ok(Poly1::new(coeffs))
}

/// Particular solution of `U'' + U'/r − U/r² = Σ b_i r^{l-1-i}`.
///
/// Returns `α_1..α_{l+1}` with `U_p = Σ α_i r^{l+1-i}`. Substituting `r^m` gives
/// `(m²−1) r^{m-2}`, so `α_i = b_i / ((l+1−i)² − 1)`, and `α_l = α_{l+1} = 0`.
/// The smallest exponent used is `m = 2`, so the denominator never vanishes.
pub fn particular_solution(b: &[f64], l: usize) -> Result<Vec<f64>> {
    if l < 2 {
        return Err(Error::InvalidInput(format!("polynomial length l must be at least 2, got {l}")));
    }
    if b.len() != l - 1 {
        return Err(Error::InvalidInput(format!("expected {} driving coefficients, got {}", l - 1, b.len())));
    }
    let mut alpha = vec![0.0; l + 1];
    for i in 1..l {
        let m = (l + 1 - i) as f64;
        alpha[i - 1] = b[i - 1] / (m * m - 1.0);
    }
    Ok(alpha)
}

/// Descending `α` vector to an ascending polynomial.
fn descending_to_poly(alpha: &[f64]) -> Poly1 {
    Poly1::new(alpha.iter().rev().copied().collect())
}

/// Homogeneous coefficient `α` and axial strain `ε̄_zz` from zero radial traction
/// at `r = R` and zero net axial force.
///
/// The axial-force equation carries a `1/ν` factor, so `ν = 0` is rejected.
pub fn solve_constants(e: &AxisymPolyField, up: &[f64], m: &ElasticModel) -> Result<(f64, f64)> {
    let nu = m.poisson_ratio();
    if nu == 0.0 {
        return Err(Error::SingularModel("axial balance is singular at ν = 0".into()));
    }
    if up.len() != e.order + 1 {
        return Err(Error::InvalidInput(format!("expected {} particular coefficients, got {}", e.order + 1, up.len())));
    }
    let radius = e.radius;
    let up = descending_to_poly(up);
    let dup = up.derivative();
    let up_over_r = up.div_x();
    let f = e.poly(Component::Rr);
    let g = e.poly(Component::Tt);
    let h = e.poly(Component::Zz);

    // α + ν ε̄ = [(1−ν)(f − U_p') + ν(g − U_p/r) + ν h]_R
    let rhs1 = (1.0 - nu) * (f.eval(radius) - dup.eval(radius))
        + nu * (g.eval(radius) - up_over_r.eval(radius))
        + nu * h.eval(radius);
    // 2α + (1−ν)/ν ε̄ = 2/R² ∫ r[(f − U_p') + (g − U_p/r) + (1−ν)/ν h] dr
    let k = (1.0 - nu) / nu;
    let integrand = (&(&(&f - &dup) + &(&g - &up_over_r)) + &(k * &h)).mul_x();
    let rhs2 = 2.0 / (radius * radius) * integrand.integrate(0.0, radius);

    let det = k - 2.0 * nu;
    let alpha = (rhs1 * k - nu * rhs2) / det;
    let eps_zz_bar = (rhs2 - 2.0 * rhs1) / det;
    Ok((alpha, eps_zz_bar))
}

/// Closed-form displacement solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymSolution {
    /// `α_1..α_{l+1}`, coefficient of `r^{l+1-i}` in `U_p`.
    pub up: Vec<f64>,
    /// Homogeneous coefficient of `U_0 = αr`.
    pub alpha: f64,
    /// The `β/r` homogeneous coefficient; always zero since `U_r(0) = 0`.
    pub beta: f64,
    pub eps_zz_bar: f64,
}

/// Forward solution with its stress polynomials, ready for evaluation.
#[derive(Debug, Clone)]
pub struct AxisymForward {
    pub solution: AxisymSolution,
    pub radius: f64,
    /// `U_r(r)`.
    pub displacement: Poly1,
    /// Elastic strain `(rr, θθ, zz)` polynomials.
    pub elastic_strain: [Poly1; 3],
    /// Stress `(rr, θθ, zz)` polynomials.
    pub stress: [Poly1; 3],
}

impl AxisymForward {
    pub fn solve(e: &AxisymPolyField, m: &ElasticModel) -> Result<Self> {
        let b = build_rhs(e, m)?;
        let up = particular_solution(&b, e.order)?;
        let (alpha, eps_zz_bar) = solve_constants(e, &up, m)?;
        let u = &descending_to_poly(&up) + &Poly1::new(vec![0.0, alpha]);
        let e_rr = &u.derivative() - &e.poly(Component::Rr);
        let e_tt = &u.div_x() - &e.poly(Component::Tt);
        let e_zz = &Poly1::constant(eps_zz_bar) - &e.poly(Component::Zz);
        let nu = m.poisson_ratio();
        let k = m.youngs_modulus() / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let combo = |a: f64, b: f64, c: f64| -> Poly1 {
            k * &(&(&(a * &e_rr) + &(b * &e_tt)) + &(c * &e_zz))
        };
        let stress = [combo(1.0 - nu, nu, nu), combo(nu, 1.0 - nu, nu), combo(nu, nu, 1.0 - nu)];
        Ok(AxisymForward {
            solution: AxisymSolution { up, alpha, beta: 0.0, eps_zz_bar },
            radius: e.radius,
            displacement: u,
            elastic_strain: [e_rr, e_tt, e_zz],
            stress,
        })
    }

    /// `(σ_rr, σ_θθ, σ_zz)` at `r`.
    pub fn stress_at(&self, r: f64) -> [f64; 3] {
        [self.stress[0].eval(r), self.stress[1].eval(r), self.stress[2].eval(r)]
    }

    /// Elastic strain `(ε_rr, ε_θθ, ε_zz)` at `r`.
    pub fn strain_at(&self, r: f64) -> [f64; 3] {
        [self.elastic_strain[0].eval(r), self.elastic_strain[1].eval(r), self.elastic_strain[2].eval(r)]
    }

    /// Stress as a tensor in the local `(r, θ, z)` frame.
    pub fn stress_tensor_at(&self, r: f64) -> SymTensor2 {
        let s = self.stress_at(r);
        SymTensor2::diag(s[0], s[1], s[2])
    }

    /// `dσ_rr/dr + (σ_rr − σ_θθ)/r` as a polynomial; identically zero in exact arithmetic.
    pub fn equilibrium_residual(&self) -> Poly1 {
        &self.stress[0].derivative() + &(&self.stress[0] - &self.stress[1]).div_x()
    }

    /// `∫_0^R r σ_zz dr`.
    pub fn axial_force_integral(&self) -> f64 {
        self.stress[2].mul_x().integrate(0.0, self.radius)
    }

    /// Largest `|σ|` over `[0, R]` sampled at `n` points.
    pub fn max_abs_stress(&self, n: usize) -> f64 {
        (0..=n)
            .map(|k| self.radius * k as f64 / n as f64)
            .flat_map(|r| self.stress_at(r))
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Measured or predicted stress at sample radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymStressProfile {
    pub r: Vec<f64>,
    pub sigma_rr: Vec<f64>,
    pub sigma_tt: Vec<f64>,
    pub sigma_zz: Vec<f64>,
    /// Per-point, per-component uncertainties `(rr, θθ, zz)`.
    pub uncertainty: Option<[Vec<f64>; 3]>,
}

impl AxisymStressProfile {
    /// Builds a profile, folding diameter-spanning radii about the axis (`r ← |r|`).
    pub fn new(
        r: Vec<f64>,
        sigma_rr: Vec<f64>,
        sigma_tt: Vec<f64>,
        sigma_zz: Vec<f64>,
        uncertainty: Option<[Vec<f64>; 3]>,
    ) -> Result<Self> {
        let n = r.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty stress profile".into()));
        }
        if sigma_rr.len() != n || sigma_tt.len() != n || sigma_zz.len() != n {
            return Err(Error::InvalidInput("stress columns differ in length from radii".into()));
        }
        if let Some(u) = &uncertainty {
            if u.iter().any(|c| c.len() != n) {
                return Err(Error::InvalidInput("uncertainty columns differ in length from radii".into()));
            }
            if u.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidInput("uncertainties must be positive".into()));
            }
        }
        let r = r.into_iter().map(f64::abs).collect();
        Ok(AxisymStressProfile { r, sigma_rr, sigma_tt, sigma_zz, uncertainty })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn at(&self, k: usize) -> [f64; 3] {
        [self.sigma_rr[k], self.sigma_tt[k], self.sigma_zz[k]]
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.len()).flat_map(|k| self.at(k)).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Checks every radius lies in `[0, R]`.
    pub fn check_radius(&self, radius: f64) -> Result<()> {
        match self.r.iter().position(|&r| r > radius * (1.0 + 1e-12)) {
            Some(k) => Err(Error::InvalidInput(format!(
                "sample {k} at r = {} lies outside the cylinder radius {radius}",
                self.r[k]
            ))),
            None => Ok(()),
        }
    }
}

/// Stress profile produced by an eigenstrain, sampled at `r`.
pub fn forward_stress(e: &AxisymPolyField, m: &ElasticModel, r: &[f64]) -> Result<AxisymStressProfile> {
    let fwd = AxisymForward::solve(e, m)?;
    if let Some(bad) = r.iter().find(|&&x| !(x >= 0.0 && x <= e.radius * (1.0 + 1e-12))) {
        return Err(Error::InvalidInput(format!("radius {bad} outside [0, {}]", e.radius)));
    }
    let (mut srr, mut stt, mut szz) = (Vec::new(), Vec::new(), Vec::new());
    for &x in r {
        let s = fwd.stress_at(x);
        srr.push(s[0]);
        stt.push(s[1]);
        szz.push(s[2]);
    }
    AxisymStressProfile::new(r.to_vec(), srr, stt, szz, None)
}

/// Splits an eigenstrain into its null part and the part orthogonal to the null space.
///
/// Null fields satisfy `ε*_rr = d(r ε*_θθ)/dr` with constant `ε*_zz`; the orthogonal
/// part satisfies `ε*_rr(R) = 0`, `ε*_θθ = d(r ε*_rr)/dr` and `∫ r ε*_zz dr = 0`.
/// Per power `r^k` with `k ≥ 1` this is a 2×2 system with determinant `k(k+2)`;
/// the constant terms are fixed by the boundary condition at `R`.
pub fn decompose_poly(e: &AxisymPolyField) -> Result<(AxisymPolyField, AxisymPolyField)> {
    if let Some(d) = e.axis_mismatch() {
        return Err(Error::NonPolynomialRhs(format!(
            "constant terms of ε*_rr and ε*_θθ differ by {d:e}; no polynomial decomposition exists"
        )));
    }
    let l = e.order;
    let radius = e.radius;
    let f = e.poly(Component::Rr);
    let g = e.poly(Component::Tt);
    let h = e.poly(Component::Zz);

    // ascending: null θθ = t_k, orthogonal rr = u_k
    let mut t = vec![0.0; l];
    let mut u = vec![0.0; l];
    for k in 1..l {
        let kp = (k + 1) as f64;
        let det = (k * (k + 2)) as f64;
        t[k] = (kp * f.coef(k) - g.coef(k)) / det;
        u[k] = (kp * g.coef(k) - f.coef(k)) / det;
    }
    u[0] = -(1..l).map(|k| u[k] * radius.powi(k as i32)).sum::<f64>();
    t[0] = f.coef(0) - u[0];

    let c = 2.0 / (radius * radius) * h.mul_x().integrate(0.0, radius);

    let desc = |asc: &[f64]| -> Vec<f64> { asc.iter().rev().copied().collect() };
    let null_g = desc(&t);
    let null = AxisymPolyField::null_field(radius, null_g, c)?;

    let sol_f = desc(&u);
    let sol_g: Vec<f64> = sol_f.iter().enumerate().map(|(i, fi)| (l - i) as f64 * fi).collect();
    let mut sol_h = e.h.clone();
    sol_h[l - 1] -= c;
    let sol = AxisymPolyField::new(l, radius, sol_f, sol_g, sol_h)?;
    Ok((null, sol))
}

/// `2π ∫_0^R r (a:b) dr` for diagonal axisymmetric fields.
pub fn axisym_inner_product(a: &AxisymPolyField, b: &AxisymPolyField) -> f64 {
    let mut total = 0.0;
    for c in [Component::Rr, Component::Tt, Component::Zz] {
        let pa = a.poly(c);
        let pb = b.poly(c);
        let mut prod = vec![0.0; pa.c.len() + pb.c.len()];
        for (i, x) in pa.c.iter().enumerate() {
            for (j, y) in pb.c.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        total += Poly1::new(prod).mul_x().integrate(0.0, a.radius.min(b.radius));
    }
    2.0 * std::f64::consts::PI * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn bronze() -> ElasticModel {
        ElasticModel::tin_bronze()
    }

    fn random_field(rng: &mut impl Rng, l: usize, radius: f64) -> AxisymPolyField {
        let mut coef = |i: usize| rng.random_range(-1e-3..1e-3) / radius.powi((l - 1 - i) as i32);
        let f: Vec<f64> = (0..l).map(&mut coef).collect();
        let mut g: Vec<f64> = (0..l).map(&mut coef).collect();
        let h: Vec<f64> = (0..l).map(&mut coef).collect();
        g[l - 1] = f[l - 1];
        AxisymPolyField::new(l, radius, f, g, h).unwrap()
    }

    #[test]
    fn probe_radii() {
        assert_eq!(probe_radius(1), Some(1.5e-3));
        assert!((probe_radius(2).unwrap() - 1.1e-3).abs() < 1e-18);
        assert!((probe_radius(3).unwrap() - 1.1e-3).abs() < 1e-18);
        assert!((probe_radius(4).unwrap() - 0.8e-3).abs() < 1e-18);
        assert_eq!(probe_radius(0), None);
        assert_eq!(probe_radius(5), None);
    }

    #[test]
    fn uniform_eigenstrain_has_zero_rhs() {
        let e = AxisymPolyField::uniform(4, 1.0, 2e-3, 2e-3, 2e-3).unwrap();
        assert_eq!(build_rhs(&e, &bronze()).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn rhs_hand_example() {
        // l = 3, ε*_rr = r², ν = 0.3: b = 2r + (1−2ν)/(1−ν)·r
        let e = AxisymPolyField::new(3, 1.0, vec![1.0, 0.0, 0.0], vec![0.0; 3], vec![0.0; 3]).unwrap();
        let m = ElasticModel::new(200e9, 0.3).unwrap();
        let b = build_rhs(&e, &m).unwrap();
        assert!((b[0] - (2.0 + 4.0 / 7.0)).abs() < 1e-15);
        assert_eq!(b[1], 0.0);
    }

    #[test]
    fn rhs_matches_symbolic_differentiation() {
        // independent route: evaluate b(r) from finite differences of the components
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let m = bronze();
        let nu = m.poisson_ratio();
        for _ in 0..10 {
            let e = random_field(&mut rng, 5, 1.0);
            let b = build_rhs(&e, &m).unwrap();
            for &r in &[0.2, 0.5, 0.9] {
                let d = 1e-5;
                let p = e.eval(r + d);
                let q = e.eval(r - d);
                let v = e.eval(r);
                let direct = (p[0] - q[0]) / (2.0 * d)
                    + nu / (1.0 - nu) * ((p[1] - q[1]) + (p[2] - q[2])) / (2.0 * d)
                    + (1.0 - 2.0 * nu) / (1.0 - nu) * (v[0] - v[1]) / r;
                let poly: f64 = b.iter().enumerate().map(|(i, bi)| bi * r.powi((3 - i) as i32)).sum();
                assert!((direct - poly).abs() < 1e-8 * e.max_abs_coef(), "{direct} vs {poly}");
            }
        }
    }

    #[test]
    fn axis_mismatch_rejected() {
        let e = AxisymPolyField::new(3, 1.0, vec![0.0, 0.0, 1e-3], vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!(matches!(build_rhs(&e, &bronze()), Err(Error::NonPolynomialRhs(_))));
        assert!(matches!(decompose_poly(&e), Err(Error::NonPolynomialRhs(_))));
    }

    #[test]
    fn particular_solution_examples() {
        assert_eq!(particular_solution(&[0.0, 0.0], 3).unwrap(), vec![0.0; 4]);
        let a = particular_solution(&[4.0, 0.0], 3).unwrap();
        assert_eq!(a, vec![0.5, 0.0, 0.0, 0.0]);
        assert!(particular_solution(&[1.0], 1).is_err());
        assert!(particular_solution(&[1.0], 3).is_err());
    }

    #[test]
    fn particular_solution_satisfies_ode() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let l = 5;
        let b: Vec<f64> = (0..l - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let alpha = particular_solution(&b, l).unwrap();
        let u = |r: f64| -> f64 { alpha.iter().enumerate().map(|(i, a)| a * r.powi((l - i) as i32)).sum() };
        let rhs = |r: f64| -> f64 { b.iter().enumerate().map(|(i, bi)| bi * r.powi((l - 2 - i) as i32)).sum() };
        let d = 1e-4;
        for k in 1..=50 {
            let r = 0.1 + 0.8 * k as f64 / 50.0;
            let upp = (u(r + d) - 2.0 * u(r) + u(r - d)) / (d * d);
            let up = (u(r + d) - u(r - d)) / (2.0 * d);
            let res = upp + up / r - u(r) / (r * r) - rhs(r);
            assert!(res.abs() < 1e-6 * bmax, "residual {res} at r = {r}");
        }
        // exact substitution check through the polynomial operator
        let p = descending_to_poly(&alpha);
        let lhs = &(&p.derivative().derivative() + &p.derivative().div_x()) - &p.div_x().div_x();
        for (k, v) in lhs.c.iter().enumerate() {
            let expected = if k + 2 <= l { b[l - 2 - k] } else { 0.0 };
            assert!((v - expected).abs() < 1e-14, "coefficient of r^{k}");
        }
    }

    #[test]
    fn zero_eigenstrain_gives_zero_constants() {
        let e = AxisymPolyField::zero(4, 1e-3).unwrap();
        let (a, ez) = solve_constants(&e, &[0.0; 5], &bronze()).unwrap();
        assert_eq!((a, ez), (0.0, 0.0));
        let m0 = ElasticModel::new(100e9, 0.0).unwrap();
        assert!(matches!(solve_constants(&e, &[0.0; 5], &m0), Err(Error::SingularModel(_))));
    }

    #[test]
    fn uniform_eigenstrain_is_stress_free() {
        let c = 1.7e-3;
        let e = AxisymPolyField::uniform(5, 1.1e-3, c, c, c).unwrap();
        let fwd = AxisymForward::solve(&e, &bronze()).unwrap();
        assert!((fwd.solution.alpha - c).abs() < 1e-15);
        assert!((fwd.solution.eps_zz_bar - c).abs() < 1e-15);
        assert_eq!(fwd.solution.beta, 0.0);
        assert!(fwd.max_abs_stress(50) < 1e-10 * bronze().youngs_modulus() * 1e-6);
    }

    #[test]
    fn null_fields_are_stress_free() {
        let radius: f64 = 1.5e-3;
        let m = bronze();
        let g: Vec<f64> = vec![3e-3 / radius.powi(3), -1e-3 / radius.powi(2), 5e-4 / radius, 2e-4];
        let n = AxisymPolyField::null_field(radius, g, 7e-4).unwrap();
        let fwd = AxisymForward::solve(&n, &m).unwrap();
        assert!(fwd.max_abs_stress(100) < 1e-10 * m.youngs_modulus());
    }

    #[test]
    fn printed_null_ratio_is_not_null() {
        // f₁ = (l−i+2−1/(l−i)) g₁ = 14/3 for l = 4 leaves stress; the
        // null relation ε*_rr = d(rε*_θθ)/dr gives f₁ = 4.
        let m = bronze();
        let printed = AxisymPolyField::new(4, 1.0, vec![14.0 / 3.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4])
            .unwrap();
        assert!(AxisymForward::solve(&printed, &m).unwrap().max_abs_stress(50) > 1e-3 * m.youngs_modulus());
        let derived =
            AxisymPolyField::new(4, 1.0, vec![4.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]).unwrap();
        assert!(AxisymForward::solve(&derived, &m).unwrap().max_abs_stress(50) < 1e-10 * m.youngs_modulus());
        let (_, sol) = decompose_poly(&derived).unwrap();
        assert!(sol.max_abs_coef() < 1e-15);
    }

    #[test]
    fn forward_constraints_hold() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let m = bronze();
        for _ in 0..20 {
            let radius = 1.1e-3;
            let e = random_field(&mut rng, 5, radius);
            let fwd = AxisymForward::solve(&e, &m).unwrap();
            let smax = fwd.max_abs_stress(200);
            assert!(fwd.stress_at(radius)[0].abs() < 1e-9 * smax);
            assert!(fwd.axial_force_integral().abs() < 1e-9 * radius * radius * smax);
            let eq = fwd.equilibrium_residual();
            for k in 1..50 {
                let r = radius * k as f64 / 50.0;
                assert!(eq.eval(r).abs() * r < 1e-9 * smax);
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let radius = 1.3;
        // pure null input
        let null_in =
            AxisymPolyField::new(4, radius, vec![4.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]).unwrap();
        let (n, s) = decompose_poly(&null_in).unwrap();
        assert!(s.max_abs_coef() < 1e-14);
        assert!(n.add(&s.scale(-1.0)).unwrap().add(&null_in.scale(-1.0)).unwrap().max_abs_coef() < 1e-14);
        // solenoidal input: f₁ = 1, g₁ = 4, f₄ = g₄ = −R³
        let r3 = radius.powi(3);
        let sol_in =
            AxisymPolyField::new(4, radius, vec![1.0, 0.0, 0.0, -r3], vec![4.0, 0.0, 0.0, -r3], vec![0.0; 4]).unwrap();
        let (n, s) = decompose_poly(&sol_in).unwrap();
        assert!(n.max_abs_coef() < 1e-14, "{n:?}");
        assert!((s.f()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decomposition_is_orthogonal_and_exact() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let radius = rng.random_range(0.5e-3..2e-3);
            let e = random_field(&mut rng, 5, radius);
            let (n, s) = decompose_poly(&e).unwrap();
            let back = n.add(&s).unwrap();
            for (a, b) in back.flat().iter().zip(e.flat()) {
                assert!((a - b).abs() <= 1e-12 * e.max_abs_coef());
            }
            // independent quadrature of 2π∫ r (n:s) dr
            let nodes = 2000;
            let mut q = 0.0;
            for k in 0..nodes {
                let r = radius * (k as f64 + 0.5) / nodes as f64;
                let a = n.eval(r);
                let b = s.eval(r);
                q += r * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
            }
            q *= 2.0 * std::f64::consts::PI * radius / nodes as f64;
            let nn = axisym_inner_product(&n, &n).sqrt();
            let ss = axisym_inner_product(&s, &s).sqrt();
            assert!(q.abs() < 1e-6 * nn * ss, "midpoint rule {q}");
            assert!(axisym_inner_product(&n, &s).abs() < 1e-10 * nn * ss);
            // parts satisfy their characterisations
            let l = 5;
            for i in 0..l {
                assert!((n.f()[i] - (l - i) as f64 * n.g()[i]).abs() <= 1e-12 * e.max_abs_coef() * radius.powi(-4));
                assert!((s.g()[i] - (l - i) as f64 * s.f()[i]).abs() <= 1e-12 * e.max_abs_coef() * radius.powi(-4));
            }
            assert!(n.h()[..l - 1].iter().all(|v| *v == 0.0));
            let fwd_s = s.poly(Component::Rr).eval(radius);
            assert!(fwd_s.abs() < 1e-12);
        }
    }

    #[test]
    fn profile_folds_diameter() {
        let p = AxisymStressProfile::new(vec![-1e-3, 1e-3], vec![1.0; 2], vec![2.0; 2], vec![3.0; 2], None).unwrap();
        assert_eq!(p.r, vec![1e-3, 1e-3]);
        assert!(AxisymStressProfile::new(vec![], vec![], vec![], vec![], None).is_err());
    }
}
