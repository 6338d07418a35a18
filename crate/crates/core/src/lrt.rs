//! Longitudinal Ray Transform `Iε(s, ξ) = ∫ ε_ij(s + tξ) ξ_i ξ_j dt` over box meshes.
//!
//! Along a straight line the interpolated field inside one cell is a cubic in `t`
//! (trilinear in the nodal case, and the Gauss-point interpolant in the cell-sampled
//! case), so two-point Gauss–Legendre per cell segment integrates it exactly.
//! Uniform trapezoid marching is available as an alternative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fem::{forward_solve_with, helmholtz_decompose_weighted, BoundaryMode, SolverOptions};
use crate::grid::{l2_norm, BoxMesh, GridSpec, GridTensorField, GridVectorField};
use crate::maxwell::MaxwellPotential;
use crate::tensor::{ElasticModel, Weight};
use crate::{Error, Result};

/// A straight line `s + tξ`, `t ∈ ℝ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: [f64; 3],
    pub direction: [f64; 3],
}

impl Ray {
    /// Normalises `direction`; a zero or non-finite direction is rejected.
    pub fn new(origin: [f64; 3], direction: [f64; 3]) -> Result<Self> {
        let n = norm(direction);
        if !(n.is_finite() && n > 0.0) || origin.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid ray {origin:?} + t {direction:?}")));
        }
        Ok(Ray { origin, direction: direction.map(|d| d / n) })
    }

    pub fn at(&self, t: f64) -> [f64; 3] {
        std::array::from_fn(|d| self.origin[d] + t * self.direction[d])
    }

    /// Entry and exit parameters against the box (slab method), `None` on a miss.
    pub fn clip(&self, spec: &GridSpec) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for d in 0..3 {
            let (o, v, l) = (self.origin[d], self.direction[d], spec.half_size[d]);
            if v == 0.0 {
                if o < -l || o > l {
                    return None;
                }
                continue;
            }
            let (a, b) = ((-l - o) / v, (l - o) / v);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 < t1).then_some((t0, t1))
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Integration scheme along the clipped segment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LrtQuadrature {
    /// Two-point Gauss–Legendre on every cell segment.
    #[default]
    CellExact,
    /// Composite trapezoid with step `fraction ×` the smallest cell edge.
    Trapezoid { fraction: f64 },
}

/// Result of one ray integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayIntegral {
    pub value: f64,
    pub path_length: f64,
    pub hit: bool,
}

/// `Iε` along `ray` with the default cell-exact rule.
pub fn lrt_integral(eps: &GridTensorField, ray: &Ray) -> RayIntegral {
    lrt_integral_with(eps, ray, LrtQuadrature::CellExact)
}

pub fn lrt_integral_with(eps: &GridTensorField, ray: &Ray, quad: LrtQuadrature) -> RayIntegral {
    let spec = eps.grid;
    let Some((t0, t1)) = ray.clip(&spec) else {
        return RayIntegral { value: 0.0, path_length: 0.0, hit: false };
    };
    let value = match quad {
        LrtQuadrature::CellExact => cell_exact(eps, ray, t0, t1),
        LrtQuadrature::Trapezoid { fraction } => trapezoid(eps, ray, t0, t1, fraction),
    };
    RayIntegral { value, path_length: t1 - t0, hit: true }
}

fn integrand_in_cell(eps: &GridTensorField, ray: &Ray, cell: usize, t: f64) -> f64 {
    let spec = eps.grid;
    let h = spec.spacing();
    let ijk = spec.cell_ijk(cell);
    let p = ray.at(t);
    let xi = std::array::from_fn(|d| {
        let lo = -spec.half_size[d] + ijk[d] as f64 * h[d];
        (2.0 * (p[d] - lo) / h[d] - 1.0).clamp(-1.0, 1.0)
    });
    eps.eval_in_cell(cell, xi).quadratic_form(ray.direction)
}

fn cell_exact(eps: &GridTensorField, ray: &Ray, t0: f64, t1: f64) -> f64 {
    let spec = eps.grid;
    let h = spec.spacing();
    let mut breaks = vec![t0, t1];
    for d in 0..3 {
        let v = ray.direction[d];
        if v == 0.0 {
            continue;
        }
        for i in 1..spec.n[d] {
            let t = (-spec.half_size[d] + i as f64 * h[d] - ray.origin[d]) / v;
            if t > t0 && t < t1 {
                breaks.push(t);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let g = 0.5 / 3.0_f64.sqrt();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let Some((cell, _)) = spec.locate(clamp_into(&spec, ray.at(mid))) else { continue };
        let f = integrand_in_cell(eps, ray, cell, mid - g * len) + integrand_in_cell(eps, ray, cell, mid + g * len);
        total += 0.5 * len * f;
    }
    total
}

fn clamp_into(spec: &GridSpec, p: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|d| p[d].clamp(-spec.half_size[d], spec.half_size[d]))
}

fn trapezoid(eps: &GridTensorField, ray: &Ray, t0: f64, t1: f64, fraction: f64) -> f64 {
    let spec = eps.grid;
    let hmin = spec.spacing().into_iter().fold(f64::INFINITY, f64::min);
    let len = t1 - t0;
    let steps = ((len / (fraction.abs().max(1e-6) * hmin)).ceil() as usize).max(1);
    let dt = len / steps as f64;
    let f = |t: f64| {
        let p = clamp_into(&spec, ray.at(t));
        spec.locate(p).map_or(0.0, |(c, xi)| eps.eval_in_cell(c, xi).quadratic_form(ray.direction))
    };
    let mut s = 0.5 * (f(t0) + f(t1));
    for i in 1..steps {
        s += f(t0 + i as f64 * dt);
    }
    s * dt
}

/// Parallel-beam detector: `nu × nv` pixels centred on the box centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorGeometry {
    pub nu: usize,
    pub nv: usize,
    /// Pixel pitch in metres along u and v.
    pub pitch: [f64; 2],
}

impl DetectorGeometry {
    /// Square detector just covering the bounding sphere of the box.
    pub fn covering(spec: &GridSpec, pixels: usize) -> Result<Self> {
        if pixels == 0 {
            return Err(Error::InvalidInput("detector needs at least one pixel".into()));
        }
        let pitch = 2.0 * norm(spec.half_size) / pixels as f64;
        Ok(DetectorGeometry { nu: pixels, nv: pixels, pitch: [pitch, pitch] })
    }

    fn validate(&self) -> Result<()> {
        if self.nu == 0 || self.nv == 0 || !self.pitch.iter().all(|p| p.is_finite() && *p > 0.0) {
            return Err(Error::InvalidInput(format!("invalid detector geometry {self:?}")));
        }
        Ok(())
    }
}

/// Orthonormal detector axes `(u, v)` with `u × v = ξ`.
pub fn detector_axes(xi: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let k = (0..3).min_by(|&a, &b| xi[a].abs().total_cmp(&xi[b].abs())).unwrap_or(0);
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let v = cross(xi, e);
    let n = norm(v);
    let v = v.map(|c| c / n);
    let u = cross(v, xi);
    (u, v)
}

/// One projection: pixel values are stored row-major with `u` fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionImage {
    pub direction: [f64; 3],
    pub geometry: DetectorGeometry,
    pub u_axis: [f64; 3],
    pub v_axis: [f64; 3],
    /// `Iε` (metres).
    pub value: Vec<f64>,
    /// Chord length through the box (metres), zero on a miss.
    pub path_length: Vec<f64>,
    /// Path average `Iε / L`, `NaN` where the ray misses.
    pub average: Vec<f64>,
    pub hit: Vec<bool>,
}

impl ProjectionImage {
    /// Detector coordinates of pixel `(i, j)`.
    pub fn pixel_coords(&self, i: usize, j: usize) -> [f64; 2] {
        pixel_coords(&self.geometry, i, j)
    }
}

fn pixel_coords(g: &DetectorGeometry, i: usize, j: usize) -> [f64; 2] {
    [(i as f64 - 0.5 * (g.nu as f64 - 1.0)) * g.pitch[0], (j as f64 - 0.5 * (g.nv as f64 - 1.0)) * g.pitch[1]]
}

/// Parallel-beam projections of `eps`, one image per direction.
pub fn simulate_projections(
    eps: &GridTensorField,
    geometry: &DetectorGeometry,
    directions: &[[f64; 3]],
    quad: LrtQuadrature,
) -> Result<Vec<ProjectionImage>> {
    if directions.is_empty() {
        return Err(Error::InvalidInput("no projection directions".into()));
    }
    geometry.validate()?;
    directions
        .iter()
        .map(|&d| {
            let xi = Ray::new([0.0; 3], d)?.direction;
            let (u_axis, v_axis) = detector_axes(xi);
            let results: Vec<RayIntegral> = (0..geometry.nu * geometry.nv)
                .into_par_iter()
                .map(|p| {
                    let [a, b] = pixel_coords(geometry, p % geometry.nu, p / geometry.nu);
                    let ray = Ray { origin: std::array::from_fn(|k| a * u_axis[k] + b * v_axis[k]), direction: xi };
                    lrt_integral_with(eps, &ray, quad)
                })
                .collect();
            Ok(ProjectionImage {
                direction: xi,
                geometry: *geometry,
                u_axis,
                v_axis,
                value: results.iter().map(|r| r.value).collect(),
                path_length: results.iter().map(|r| r.path_length).collect(),
                average: results.iter().map(|r| if r.path_length > 0.0 { r.value / r.path_length } else { f64::NAN }).collect(),
                hit: results.iter().map(|r| r.hit).collect(),
            })
        })
        .collect()
}

/// Stress from the LRT-visible part of an elastic strain field.
///
/// The boundary-vanishing potential part of `ε` is removed by the zero-displacement
/// decomposition and the remainder `ˢε` is fed back as the eigenstrain `−ˢε`.
pub fn reconstruct_stress_from_strain(eps_elastic: &GridTensorField, m: &ElasticModel, mesh: &BoxMesh) -> Result<GridTensorField> {
    reconstruct_stress_with(eps_elastic, m, mesh, &SolverOptions::default())
}

pub fn reconstruct_stress_with(
    eps_elastic: &GridTensorField,
    m: &ElasticModel,
    mesh: &BoxMesh,
    opts: &SolverOptions,
) -> Result<GridTensorField> {
    let d = helmholtz_decompose_weighted(eps_elastic, mesh, BoundaryMode::ZeroDisplacement, &Weight::Identity, opts)?;
    Ok(forward_solve_with(&d.solenoidal.scale(-1.0), m, mesh, opts)?.sigma)
}

/// Displacement `a·Π(1 − x_d²/L_d²)·(1, 1, 1)`, zero on the box boundary.
pub fn boundary_bubble(half_size: [f64; 3], amplitude: f64) -> impl Fn([f64; 3]) -> [f64; 3] + Sync + Send {
    move |p: [f64; 3]| {
        let b = amplitude * (0..3).map(|d| 1.0 - (p[d] / half_size[d]).powi(2)).product::<f64>();
        [b, b, b]
    }
}

/// Deterministic, roughly uniform ray family: Fibonacci-sphere directions through
/// offset points inside the box.
pub fn ray_family(spec: &GridSpec, count: usize) -> Vec<Ray> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            let dir = [rho * phi.cos(), rho * phi.sin(), z];
            let frac = |m: f64| ((k as f64 * m).fract() - 0.5) * 1.8;
            let origin = [frac(0.618_034), frac(0.754_878), frac(0.569_840)];
            Ray::new(std::array::from_fn(|d| origin[d] * spec.half_size[d]), dir).expect("unit direction")
        })
        .collect()
}

/// One row of the stress-from-LRT consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkCheckRow {
    pub n: usize,
    /// `‖σ_rec − σ‖ / ‖σ‖` with the contaminated input.
    pub relative_error: f64,
    /// Same without contamination.
    pub relative_error_clean: f64,
    /// `‖σ_rec(contaminated) − σ_rec(clean)‖ / ‖σ‖`.
    pub contamination_effect: f64,
    /// Largest `|Iε| / (scale · L)` of the contamination over the ray family.
    pub lrt_of_contamination: f64,
    pub rays: usize,
}

/// Elastic strain `S:σ` of a Maxwell stress field plus the gradient of a boundary bubble of
/// displacement amplitude `contamination` (m), reconstructed through the LRT-visible part and compared
/// with the analytic stress at the Gauss points.
pub fn link_check(p: &MaxwellPotential, m: &ElasticModel, n: usize, contamination: f64, rays: usize) -> Result<LinkCheckRow> {
    let l = p.half_size;
    let mesh = BoxMesh::cube(l, n)?;
    let sp = p.stress_polys();
    let sigma = GridTensorField::from_fn_gauss(&mesh, |x| sp.eval(x));
    let eps = sigma.map(|s| m.apply_compliance(s));
    let bump = GridVectorField::from_fn(&mesh, boundary_bubble([l; 3], contamination)).symmetric_gradient();
    let clean = reconstruct_stress_from_strain(&eps, m, &mesh)?;
    let dirty = reconstruct_stress_from_strain(&eps.add(&bump)?, m, &mesh)?;
    let s = l2_norm(&sigma);
    let scale = bump.max_abs().max(f64::MIN_POSITIVE);
    let lrt_of_contamination = ray_family(&mesh.spec(), rays)
        .iter()
        .map(|r| lrt_integral(&bump, r))
        .filter(|r| r.hit)
        .fold(0.0_f64, |a, r| a.max(r.value.abs() / (scale * r.path_length)));
    Ok(LinkCheckRow {
        n,
        relative_error: l2_norm(&dirty.sub(&sigma)?) / s,
        relative_error_clean: l2_norm(&clean.sub(&sigma)?) / s,
        contamination_effect: l2_norm(&dirty.sub(&clean)?) / s,
        lrt_of_contamination,
        rays,
    })
}
