//! Maxwell stress functions on the cube `[−L, L]³`.
//!
//! A diagonal Beltrami potential `Λ = diag(Λ_x, Λ_y, Λ_z)` gives the stress
//!
//! ```text
//! σ_xx = Λ_y,zz + Λ_z,yy   σ_yy = Λ_z,xx + Λ_x,zz   σ_zz = Λ_x,yy + Λ_y,xx
//! σ_xy = −Λ_z,xy           σ_yz = −Λ_x,yz           σ_xz = −Λ_y,xz
//! ```
//!
//! which is divergence free for any `Λ`. For the cube with the symmetries of a
//! printed block, `Λ_x = Λ_y = Λ_∥` and `Λ_z = Λ_⊥`, both even and symmetric under
//! `x ↔ y`, each carrying the factor
//! `Φ = ((x/L)²−1)²((y/L)²−1)²((z/L)²−1)²` that removes boundary traction.
//!
//! Polynomials are stored in the normalised coordinates `ξ = x/L` and the
//! potentials are scaled by `L²`, so coefficients carry units of stress.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lstsq::{self, DEFAULT_RCOND};
use crate::tensor::SymTensor2;
use crate::{Error, Result};

/// Dense trivariate polynomial `Σ c[p][q][s] ξ^p η^q ζ^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly3 {
    deg: [usize; 3],
    c: Vec<f64>,
}

impl Poly3 {
    pub fn zero() -> Poly3 {
        Poly3 { deg: [0; 3], c: vec![0.0] }
    }

    pub fn monomial(coef: f64, p: usize, q: usize, s: usize) -> Poly3 {
        let mut out = Poly3::with_degree([p, q, s]);
        let i = out.index(p, q, s);
        out.c[i] = coef;
        out
    }

    fn with_degree(deg: [usize; 3]) -> Poly3 {
        Poly3 { deg, c: vec![0.0; (deg[0] + 1) * (deg[1] + 1) * (deg[2] + 1)] }
    }

    fn index(&self, p: usize, q: usize, s: usize) -> usize {
        (p * (self.deg[1] + 1) + q) * (self.deg[2] + 1) + s
    }

    pub fn degree(&self) -> [usize; 3] {
        self.deg
    }

    pub fn coef(&self, p: usize, q: usize, s: usize) -> f64 {
        if p > self.deg[0] || q > self.deg[1] || s > self.deg[2] {
            0.0
        } else {
            self.c[self.index(p, q, s)]
        }
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        let [_, dq, ds] = self.deg;
        self.c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(i, &v)| {
            let s = i % (ds + 1);
            let q = (i / (ds + 1)) % (dq + 1);
            let p = i / ((ds + 1) * (dq + 1));
            (p, q, s, v)
        })
    }

    pub fn add(&self, o: &Poly3) -> Poly3 {
        let deg = [0, 1, 2].map(|k| self.deg[k].max(o.deg[k]));
        let mut out = Poly3::with_degree(deg);
        for src in [self, o] {
            for (p, q, s, v) in src.terms() {
                let i = out.index(p, q, s);
                out.c[i] += v;
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Poly3 {
        Poly3 { deg: self.deg, c: self.c.iter().map(|v| v * k).collect() }
    }

    pub fn mul(&self, o: &Poly3) -> Poly3 {
        let deg = [0, 1, 2].map(|k| self.deg[k] + o.deg[k]);
        let mut out = Poly3::with_degree(deg);
        for (p, q, s, v) in self.terms() {
            for (p2, q2, s2, w) in o.terms() {
                let i = out.index(p + p2, q + q2, s + s2);
                out.c[i] += v * w;
            }
        }
        out
    }

    /// Partial derivative along axis 0, 1 or 2.
    pub fn deriv(&self, axis: usize) -> Poly3 {
        let mut deg = self.deg;
        deg[axis] = deg[axis].saturating_sub(1);
        let mut out = Poly3::with_degree(deg);
        for (p, q, s, v) in self.terms() {
            let e = [p, q, s];
            if e[axis] == 0 {
                continue;
            }
            let mut t = e;
            t[axis] -= 1;
            let i = out.index(t[0], t[1], t[2]);
            out.c[i] += v * e[axis] as f64;
        }
        out
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let [dp, dq, ds] = self.deg;
        let mut acc_p = 0.0;
        for p in (0..=dp).rev() {
            let mut acc_q = 0.0;
            for q in (0..=dq).rev() {
                let base = self.index(p, q, 0);
                let mut acc_s = 0.0;
                for s in (0..=ds).rev() {
                    acc_s = acc_s * x[2] + self.c[base + s];
                }
                acc_q = acc_q * x[1] + acc_s;
            }
            acc_p = acc_p * x[0] + acc_q;
        }
        acc_p
    }

    /// Exact integral over `[−1, 1]³`.
    pub fn integrate_cube(&self) -> f64 {
        let m = |k: usize| if k.is_multiple_of(2) { 2.0 / (k + 1) as f64 } else { 0.0 };
        self.terms().map(|(p, q, s, v)| v * m(p) * m(q) * m(s)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }
}

/// `((ξ)²−1)²` along one axis.
fn bump(axis: usize) -> Poly3 {
    let mono = |c: f64, k: usize| {
        let mut e = [0; 3];
        e[axis] = k;
        Poly3::monomial(c, e[0], e[1], e[2])
    };
    mono(1.0, 4).add(&mono(-2.0, 2)).add(&mono(1.0, 0))
}

/// Boundary factor `Φ` in normalised coordinates.
pub fn phi() -> Poly3 {
    bump(0).mul(&bump(1)).mul(&bump(2))
}

/// General diagonal potential; `Λ = ℓ² diag(λx, λy, λz)(x/ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPotential {
    pub length: f64,
    pub lx: Poly3,
    pub ly: Poly3,
    pub lz: Poly3,
}

/// Second derivatives needed for the stress, cached per potential.
#[derive(Debug, Clone)]
pub struct StressPolys {
    length: f64,
    /// `[xx, yy, zz, xy, yz, xz]`.
    comps: [Poly3; 6],
}

impl DiagonalPotential {
    pub fn new(length: f64, lx: Poly3, ly: Poly3, lz: Poly3) -> Self {
        DiagonalPotential { length, lx, ly, lz }
    }

    pub fn stress_polys(&self) -> StressPolys {
        let d2 = |p: &Poly3, a: usize, b: usize| p.deriv(a).deriv(b);
        let comps = [
            d2(&self.ly, 2, 2).add(&d2(&self.lz, 1, 1)),
            d2(&self.lz, 0, 0).add(&d2(&self.lx, 2, 2)),
            d2(&self.lx, 1, 1).add(&d2(&self.ly, 0, 0)),
            d2(&self.lz, 0, 1).scale(-1.0),
            d2(&self.lx, 1, 2).scale(-1.0),
            d2(&self.ly, 0, 2).scale(-1.0),
        ];
        StressPolys { length: self.length, comps }
    }

    pub fn stress(&self, x: [f64; 3]) -> SymTensor2 {
        self.stress_polys().eval(x)
    }
}

impl StressPolys {
    fn normalise(&self, x: [f64; 3]) -> [f64; 3] {
        x.map(|v| v / self.length)
    }

    pub fn eval(&self, x: [f64; 3]) -> SymTensor2 {
        let xi = self.normalise(x);
        SymTensor2::from_array(std::array::from_fn(|k| self.comps[k].eval(xi)))
    }

    pub fn component(&self, k: usize) -> &Poly3 {
        &self.comps[k]
    }

    /// `Div σ` as three polynomials in `ξ`, in stress per unit length once divided by `ℓ`.
    pub fn divergence_polys(&self) -> [Poly3; 3] {
        let c = &self.comps;
        [
            c[0].deriv(0).add(&c[3].deriv(1)).add(&c[5].deriv(2)),
            c[3].deriv(0).add(&c[1].deriv(1)).add(&c[4].deriv(2)),
            c[5].deriv(0).add(&c[4].deriv(1)).add(&c[2].deriv(2)),
        ]
    }

    /// Volume average of the stress over `[−ℓ, ℓ]³`.
    pub fn mean(&self) -> SymTensor2 {
        SymTensor2::from_array(std::array::from_fn(|k| self.comps[k].integrate_cube() / 8.0))
    }
}

/// Symmetry-reduced Maxwell potential on a cube of half size `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellPotential {
    pub half_size: f64,
    pub z_order: usize,
    pub plane_terms: usize,
    /// Coefficients of `Λ_∥`, `a[i][j]` multiplying `Φ (z/L)^{2i} s_j`.
    pub a: Vec<Vec<f64>>,
    /// Coefficients of `Λ_⊥`.
    pub b: Vec<Vec<f64>>,
}

/// Basis split matching 24 coefficients with at most degree 8 per variable.
pub const DEFAULT_Z_ORDER: usize = 3;
pub const DEFAULT_PLANE_TERMS: usize = 4;

/// Exponents `(a, b)` of `e₁^a e₂^b`, ordered by `a + 2b`, then by `b`.
pub fn plane_exponents(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n);
    let mut d = 0;
    while out.len() < n {
        for b in 0..=d / 2 {
            if out.len() < n {
                out.push((d - 2 * b, b));
            }
        }
        d += 1;
    }
    out
}

fn plane_poly(a: usize, b: usize) -> Poly3 {
    let e1 = Poly3::monomial(1.0, 2, 0, 0).add(&Poly3::monomial(1.0, 0, 2, 0));
    let e2 = Poly3::monomial(1.0, 2, 2, 0);
    let mut out = Poly3::monomial(1.0, 0, 0, 0);
    for _ in 0..a {
        out = out.mul(&e1);
    }
    for _ in 0..b {
        out = out.mul(&e2);
    }
    out
}

impl MaxwellPotential {
    pub fn zeros(half_size: f64, z_order: usize, plane_terms: usize) -> Result<Self> {
        if z_order == 0 || plane_terms == 0 {
            return Err(Error::InvalidInput("Maxwell basis orders must be at least 1".into()));
        }
        if !(half_size.is_finite() && half_size > 0.0) {
            return Err(Error::InvalidInput(format!("cube half size must be positive, got {half_size}")));
        }
        let z = vec![vec![0.0; plane_terms]; z_order];
        Ok(MaxwellPotential { half_size, z_order, plane_terms, a: z.clone(), b: z })
    }

    pub fn len(&self) -> usize {
        2 * self.z_order * self.plane_terms
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `[a; b]` flattened row-major.
    pub fn coefficients(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).flatten().copied().collect()
    }

    pub fn from_coefficients(half_size: f64, z_order: usize, plane_terms: usize, c: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(half_size, z_order, plane_terms)?;
        if c.len() != p.len() {
            return Err(Error::InvalidInput(format!("expected {} coefficients, got {}", p.len(), c.len())));
        }
        let half = z_order * plane_terms;
        for i in 0..z_order {
            for j in 0..plane_terms {
                p.a[i][j] = c[i * plane_terms + j];
                p.b[i][j] = c[half + i * plane_terms + j];
            }
        }
        Ok(p)
    }

    /// Labels `a{i}{j}` and `b{i}{j}` in coefficient order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for name in ["a", "b"] {
            for i in 0..self.z_order {
                for j in 0..self.plane_terms {
                    out.push(format!("{name}{i}{j}"));
                }
            }
        }
        out
    }

    fn component(&self, coef: &[Vec<f64>]) -> Poly3 {
        let exps = plane_exponents(self.plane_terms);
        let mut inner = Poly3::zero();
        for (i, row) in coef.iter().enumerate() {
            let zeta = Poly3::monomial(1.0, 0, 0, 2 * i);
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    inner = inner.add(&zeta.mul(&plane_poly(exps[j].0, exps[j].1)).scale(v));
                }
            }
        }
        phi().mul(&inner)
    }

    pub fn to_diagonal(&self) -> DiagonalPotential {
        let par = self.component(&self.a);
        let perp = self.component(&self.b);
        DiagonalPotential::new(self.half_size, par.clone(), par, perp)
    }

    pub fn stress_polys(&self) -> StressPolys {
        self.to_diagonal().stress_polys()
    }

    pub fn stress(&self, x: [f64; 3]) -> SymTensor2 {
        self.stress_polys().eval(x)
    }
}

/// Stress at `x` from a Maxwell potential.
pub fn stress_from_potential(p: &MaxwellPotential, x: [f64; 3]) -> SymTensor2 {
    p.stress(x)
}

/// One unit-coefficient potential per `(a|b, z power, plane term)`.
pub fn build_symmetric_basis(z_order: usize, plane_terms: usize, half_size: f64) -> Result<Vec<MaxwellPotential>> {
    let n = MaxwellPotential::zeros(half_size, z_order, plane_terms)?.len();
    (0..n)
        .map(|k| {
            let mut c = vec![0.0; n];
            c[k] = 1.0;
            MaxwellPotential::from_coefficients(half_size, z_order, plane_terms, &c)
        })
        .collect()
}

/// Pointwise stress measurements inside the cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressSampleSet {
    pub points: Vec<[f64; 3]>,
    pub sigma: Vec<SymTensor2>,
    /// Per-component uncertainties `[xx, yy, zz, xy, yz, xz]`.
    pub uncertainty: Option<Vec<[f64; 6]>>,
}

impl StressSampleSet {
    pub fn new(
        points: Vec<[f64; 3]>,
        sigma: Vec<SymTensor2>,
        uncertainty: Option<Vec<[f64; 6]>>,
        half_size: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("no stress samples".into()));
        }
        if sigma.len() != points.len() {
            return Err(Error::InvalidInput("stress and point counts differ".into()));
        }
        if let Some(u) = &uncertainty {
            if u.len() != points.len() {
                return Err(Error::InvalidInput("uncertainty and point counts differ".into()));
            }
            if u.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidInput("uncertainties must be positive".into()));
            }
        }
        let tol = half_size * (1.0 + 1e-12);
        if let Some(k) = points.iter().position(|p| p.iter().any(|v| v.abs() > tol)) {
            return Err(Error::InvalidInput(format!("sample {k} at {:?} lies outside the cube", points[k])));
        }
        Ok(StressSampleSet { points, sigma, uncertainty })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Samples of a potential's stress at `points`.
    pub fn from_potential(p: &MaxwellPotential, points: Vec<[f64; 3]>) -> Result<Self> {
        let sp = p.stress_polys();
        let sigma = points.iter().map(|x| sp.eval(*x)).collect();
        Self::new(points, sigma, None, p.half_size)
    }

    pub fn max_abs(&self) -> f64 {
        self.sigma.iter().map(|s| s.max_abs()).fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box of the sample points.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// `n × n` grid on the `x = 0` section, inset from the faces by `inset`.
pub fn section_grid(half_size: f64, inset: f64, n: usize) -> Vec<[f64; 3]> {
    let a = half_size - inset;
    let t = |k: usize| if n == 1 { 0.0 } else { -a + 2.0 * a * k as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push([0.0, t(j), t(i)]);
        }
    }
    out
}

/// Result of a Maxwell fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellFitReport {
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub design_shape: [usize; 2],
    /// RMS residual per component `[xx, yy, zz, xy, yz, xz]` (Pa).
    pub rms_residual: [f64; 6],
    pub residual_norm: f64,
    pub max_abs_measured: f64,
    pub condition_number: f64,
    pub rank: usize,
    pub sample_bounds: [[f64; 3]; 2],
    pub warnings: Vec<String>,
}

impl MaxwellFitReport {
    /// Flags evaluation points outside the sampled region, where the fitted
    /// polynomial extrapolates and may oscillate.
    pub fn extrapolation_warning(&self, points: &[[f64; 3]]) -> Option<String> {
        let [lo, hi] = self.sample_bounds;
        let span = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        let tol = 1e-9 * span.max(f64::MIN_POSITIVE);
        let outside = points
            .iter()
            .filter(|p| (0..3).any(|k| p[k] < lo[k] - tol || p[k] > hi[k] + tol))
            .count();
        (outside > 0).then(|| {
            format!(
                "{outside} of {} evaluation points lie outside the sampled region; polynomial extrapolation may oscillate near the boundary",
                points.len()
            )
        })
    }
}

/// Fitted potential and its report.
#[derive(Debug, Clone)]
pub struct MaxwellFit {
    pub coefficients: Vec<f64>,
    pub fitted: MaxwellPotential,
    pub report: MaxwellFitReport,
}

/// Design matrix `A[6N × M]`, rows ordered by sample then component.
pub fn design_matrix(samples: &StressSampleSet, basis: &[MaxwellPotential]) -> DMatrix<f64> {
    let cols: Vec<Vec<f64>> = basis
        .par_iter()
        .map(|b| {
            let sp = b.stress_polys();
            samples.points.iter().flat_map(|x| sp.eval(*x).to_array()).collect()
        })
        .collect();
    DMatrix::from_fn(6 * samples.len(), basis.len(), |i, j| cols[j][i])
}

/// Minimum-norm least-squares fit of basis coefficients to stress samples.
pub fn fit_stress_field(samples: &StressSampleSet, basis: &[MaxwellPotential]) -> Result<MaxwellFit> {
    fit_stress_field_rcond(samples, basis, DEFAULT_RCOND)
}

pub fn fit_stress_field_rcond(samples: &StressSampleSet, basis: &[MaxwellPotential], rcond: f64) -> Result<MaxwellFit> {
    let first = basis.first().ok_or_else(|| Error::InvalidInput("empty Maxwell basis".into()))?;
    if basis
        .iter()
        .any(|b| b.half_size != first.half_size || b.z_order != first.z_order || b.plane_terms != first.plane_terms)
    {
        return Err(Error::InvalidInput("basis elements differ in shape".into()));
    }
    let a = design_matrix(samples, basis);
    let w = DVector::from_fn(6 * samples.len(), |i, _| match &samples.uncertainty {
        Some(u) => 1.0 / u[i / 6][i % 6],
        None => 1.0,
    });
    let b = DVector::from_fn(6 * samples.len(), |i, _| samples.sigma[i / 6].to_array()[i % 6]);
    let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * w[i]);
    let sol = lstsq::solve(&aw, &b.component_mul(&w), rcond)?;

    let mut fitted = MaxwellPotential::zeros(first.half_size, first.z_order, first.plane_terms)?;
    let mut total = vec![0.0; fitted.len()];
    for (bj, xj) in basis.iter().zip(sol.x.iter()) {
        for (t, c) in total.iter_mut().zip(bj.coefficients()) {
            *t += xj * c;
        }
    }
    fitted = MaxwellPotential::from_coefficients(fitted.half_size, fitted.z_order, fitted.plane_terms, &total)?;

    let diff = &a * &sol.x - &b;
    let mut rms = [0.0; 6];
    for (i, d) in diff.iter().enumerate() {
        rms[i % 6] += d * d;
    }
    let rms = rms.map(|v| (v / samples.len() as f64).sqrt());
    let mut warnings = Vec::new();
    if sol.rank_deficient() {
        warnings.push(format!(
            "design matrix is rank deficient ({} of {} coefficients resolved); minimum-norm solution returned",
            sol.rank,
            basis.len()
        ));
    }
    let (lo, hi) = samples.bounds();
    let labels = if basis.len() == first.len() { first.labels() } else { (0..basis.len()).map(|k| format!("c{k}")).collect() };
    let coefficients: Vec<f64> = sol.x.iter().copied().collect();
    let report = MaxwellFitReport {
        labels,
        coefficients: coefficients.clone(),
        design_shape: [a.nrows(), a.ncols()],
        rms_residual: rms,
        residual_norm: diff.norm(),
        max_abs_measured: samples.max_abs(),
        condition_number: sol.condition_number,
        rank: sol.rank,
        sample_bounds: [lo, hi],
        warnings,
    };
    Ok(MaxwellFit { coefficients, fitted, report })
}

/// Equilibrium and boundary checks on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    pub n_grid: usize,
    pub max_abs_stress: f64,
    /// Largest `|Div σ|` (Pa/m).
    pub max_divergence: f64,
    /// `L·max|Div σ|`, comparable with stress.
    pub max_divergence_scaled: f64,
    pub max_traction: f64,
    pub mean_stress: SymTensor2,
}

/// Samples `|Div σ|` on an `n³` grid, `|σ·n|` on an `n²` grid per face, and the exact mean stress.
pub fn field_diagnostics(p: &MaxwellPotential, n_grid: usize) -> Result<FieldDiagnostics> {
    if n_grid < 4 {
        return Err(Error::InvalidInput(format!("diagnostic grid needs at least 4 points per axis, got {n_grid}")));
    }
    let sp = p.stress_polys();
    let div = sp.divergence_polys();
    let t = |k: usize| -1.0 + 2.0 * k as f64 / (n_grid - 1) as f64;
    let (max_s, max_d) = (0..n_grid)
        .into_par_iter()
        .map(|i| {
            let mut ms = 0.0_f64;
            let mut md = 0.0_f64;
            for j in 0..n_grid {
                for k in 0..n_grid {
                    let xi = [t(i), t(j), t(k)];
                    for c in sp.comps.iter() {
                        ms = ms.max(c.eval(xi).abs());
                    }
                    let d = div.iter().map(|q| q.eval(xi).powi(2)).sum::<f64>().sqrt();
                    md = md.max(d);
                }
            }
            (ms, md)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let mut max_t = 0.0_f64;
    for axis in 0..3 {
        for side in [-1.0, 1.0] {
            for i in 0..n_grid {
                for j in 0..n_grid {
                    let mut xi = [0.0; 3];
                    xi[axis] = side;
                    xi[(axis + 1) % 3] = t(i);
                    xi[(axis + 2) % 3] = t(j);
                    let s = SymTensor2::from_array(std::array::from_fn(|k| sp.comps[k].eval(xi)));
                    let mut n = [0.0; 3];
                    n[axis] = side;
                    let tr = s.dot_vec(n);
                    max_t = max_t.max((tr[0] * tr[0] + tr[1] * tr[1] + tr[2] * tr[2]).sqrt());
                }
            }
        }
    }
    Ok(FieldDiagnostics {
        n_grid,
        max_abs_stress: max_s,
        max_divergence: max_d / p.half_size,
        max_divergence_scaled: max_d,
        max_traction: max_t,
        mean_stress: sp.mean(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_potential(rng: &mut impl Rng) -> MaxwellPotential {
        let c: Vec<f64> = (0..24).map(|_| rng.random_range(-100e6..100e6)).collect();
        MaxwellPotential::from_coefficients(8.5e-3, DEFAULT_Z_ORDER, DEFAULT_PLANE_TERMS, &c).unwrap()
    }

    #[test]
    fn plane_exponent_order() {
        assert_eq!(
            plane_exponents(9),
            vec![(0, 0), (1, 0), (2, 0), (0, 1), (3, 0), (1, 1), (4, 0), (2, 1), (0, 2)]
        );
    }

    #[test]
    fn quadratic_harness_gives_four_identity() {
        let q = Poly3::monomial(1.0, 2, 0, 0).add(&Poly3::monomial(1.0, 0, 2, 0)).add(&Poly3::monomial(1.0, 0, 0, 2));
        let d = DiagonalPotential::new(1.0, q.clone(), q.clone(), q);
        let s = d.stress([0.3, -0.2, 0.9]);
        assert_eq!(s, SymTensor2::diag(4.0, 4.0, 4.0));
    }

    #[test]
    fn linear_potential_gives_zero() {
        let q = Poly3::monomial(2.0, 1, 0, 0).add(&Poly3::monomial(-1.0, 0, 0, 1)).add(&Poly3::monomial(5.0, 0, 0, 0));
        let d = DiagonalPotential::new(1.0, q.clone(), q.clone(), q);
        assert_eq!(d.stress([0.1, 0.2, 0.3]), SymTensor2::ZERO);
    }

    #[test]
    fn basis_counts_and_degree() {
        assert_eq!(build_symmetric_basis(1, 1, 1.0).unwrap().len(), 2);
        let basis = build_symmetric_basis(DEFAULT_Z_ORDER, DEFAULT_PLANE_TERMS, 8.5e-3).unwrap();
        assert_eq!(basis.len(), 24);
        let mut deg = [0; 3];
        for b in &basis {
            let d = b.to_diagonal();
            for p in [&d.lx, &d.lz] {
                let nz = p.terms().fold([0; 3], |m, (a, b, c, _)| [m[0].max(a), m[1].max(b), m[2].max(c)]);
                deg = [0, 1, 2].map(|k| deg[k].max(nz[k]));
            }
        }
        assert_eq!(deg, [8, 8, 8]);
    }

    #[test]
    fn analytic_matches_finite_difference_hessian() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let p = random_potential(&mut rng);
        let d = p.to_diagonal();
        let len = p.half_size;
        let lam = |q: &Poly3, x: [f64; 3]| len * len * q.eval(x.map(|v| v / len));
        let h = 1e-4 * len;
        let d2 = |q: &Poly3, x: [f64; 3], a: usize, b: usize| {
            let sh = |da: f64, db: f64| {
                let mut y = x;
                y[a] += da;
                y[b] += db;
                lam(q, y)
            };
            (sh(h, h) - sh(h, -h) - sh(-h, h) + sh(-h, -h)) / (4.0 * h * h)
        };
        let smax = field_diagnostics(&p, 9).unwrap().max_abs_stress;
        for _ in 0..20 {
            let x = [0; 3].map(|_| rng.random_range(-0.9..0.9) * len);
            let fd = [
                d2(&d.ly, x, 2, 2) + d2(&d.lz, x, 1, 1),
                d2(&d.lz, x, 0, 0) + d2(&d.lx, x, 2, 2),
                d2(&d.lx, x, 1, 1) + d2(&d.ly, x, 0, 0),
                -d2(&d.lz, x, 0, 1),
                -d2(&d.lx, x, 1, 2),
                -d2(&d.ly, x, 0, 2),
            ];
            let an = p.stress(x).to_array();
            for k in 0..6 {
                assert!((fd[k] - an[k]).abs() < 1e-6 * smax, "component {k}: {} vs {}", fd[k], an[k]);
            }
        }
    }

    #[test]
    fn symmetry_of_basis_fields() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for b in build_symmetric_basis(3, 4, 2.0).unwrap() {
            let sp = b.stress_polys();
            for _ in 0..5 {
                let x = [0; 3].map(|_| rng.random_range(-2.0..2.0));
                let s = sp.eval(x);
                let swapped = sp.eval([x[1], x[0], x[2]]).swap_xy();
                assert!((s - swapped).max_abs() <= 1e-12 * s.max_abs().max(1.0));
                let mirrored = sp.eval([-x[0], x[1], x[2]]);
                // reflecting x flips the sign of the xy and xz shears
                let expect = SymTensor2::from_array({
                    let mut a = s.to_array();
                    a[3] = -a[3];
                    a[5] = -a[5];
                    a
                });
                assert!((mirrored - expect).max_abs() <= 1e-12 * s.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn diagnostics_vanish() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..5 {
            let p = random_potential(&mut rng);
            let d = field_diagnostics(&p, 9).unwrap();
            assert!(d.max_divergence_scaled <= 1e-8 * d.max_abs_stress);
            assert!(d.max_traction <= 1e-8 * d.max_abs_stress);
            assert!(d.mean_stress.max_abs() <= 1e-8 * d.max_abs_stress);
        }
        let z = MaxwellPotential::zeros(1.0, 3, 4).unwrap();
        let d = field_diagnostics(&z, 4).unwrap();
        assert_eq!((d.max_abs_stress, d.max_divergence, d.max_traction), (0.0, 0.0, 0.0));
        assert!(field_diagnostics(&z, 3).is_err());
    }

    #[test]
    fn section_grid_round_trip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let truth = random_potential(&mut rng);
        let samples = StressSampleSet::from_potential(&truth, section_grid(8.5e-3, 1e-3, 8)).unwrap();
        let basis = build_symmetric_basis(3, 4, 8.5e-3).unwrap();
        let fit = fit_stress_field(&samples, &basis).unwrap();
        assert_eq!(fit.report.design_shape, [384, 24]);
        let tc = truth.coefficients();
        let scale = tc.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in fit.coefficients.iter().zip(&tc) {
            assert!((a - b).abs() < 1e-8 * scale, "{a} vs {b}");
        }
        let zeros = StressSampleSet::new(samples.points.clone(), vec![SymTensor2::ZERO; 64], None, 8.5e-3).unwrap();
        let z = fit_stress_field(&zeros, &basis).unwrap();
        assert!(z.coefficients.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn extrapolation_is_flagged() {
        let basis = build_symmetric_basis(1, 2, 1.0).unwrap();
        let p = MaxwellPotential::from_coefficients(1.0, 1, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = StressSampleSet::from_potential(&p, section_grid(1.0, 0.1, 4)).unwrap();
        let fit = fit_stress_field(&s, &basis).unwrap();
        assert!(fit.report.extrapolation_warning(&[[0.0, 0.5, 0.5]]).is_none());
        assert!(fit.report.extrapolation_warning(&[[0.0, 0.95, 0.0]]).is_some());
    }

    #[test]
    fn outside_sample_rejected() {
        assert!(StressSampleSet::new(vec![[0.0, 0.0, 1.1]], vec![SymTensor2::ZERO], None, 1.0).is_err());
    }
}
