//! Run configuration: a TOML file with one table per subcommand plus `[material]`,
//! overridden by `--key=value` flags.

use std::path::{Path, PathBuf};

use eigenstrain::axisym::probe_radius;
use eigenstrain::ElasticModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    /// `tin_bronze` or `inconel_718`.
    pub preset: Option<String>,
    pub youngs_modulus_gpa: Option<f64>,
    pub poisson_ratio: Option<f64>,
}

impl MaterialConfig {
    /// Explicit constants win over the preset; `fallback` applies when neither is given.
    pub fn resolve(&self, fallback: &str) -> Result<ElasticModel, CliError> {
        let preset = self.preset.as_deref().unwrap_or(fallback);
        let base = match preset {
            "tin_bronze" => ElasticModel::tin_bronze(),
            "inconel_718" => ElasticModel::inconel_718(),
            other => return Err(CliError::Usage(format!("unknown material preset `{other}` (expected tin_bronze or inconel_718)"))),
        };
        let e = self.youngs_modulus_gpa.map_or(base.youngs_modulus(), |g| g * 1e9);
        let nu = self.poisson_ratio.unwrap_or(base.poisson_ratio());
        if !(e.is_finite() && e > 0.0) {
            return Err(CliError::Usage(format!("Young's modulus must be positive, got {e}")));
        }
        if !(nu > -1.0 && nu < 0.5) {
            return Err(CliError::Usage(format!("Poisson ratio must lie in (-1, 0.5), got {nu}")));
        }
        ElasticModel::new(e, nu).map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Cylinder radius from `radius_mm` or a probe `sample` number.
fn cylinder_radius(radius_mm: Option<f64>, sample: Option<usize>) -> Result<f64, CliError> {
    match (radius_mm, sample) {
        (Some(r), _) if r.is_finite() && r > 0.0 => Ok(r / 1e3),
        (Some(r), _) => Err(CliError::Usage(format!("radius_mm must be positive, got {r}"))),
        (None, Some(s)) => probe_radius(s).ok_or_else(|| CliError::Usage(format!("probe sample must be 1..=4, got {s}"))),
        (None, None) => Err(CliError::Usage("set radius_mm or sample".into())),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be at least {min}, got {v}")))
    }
}

fn required<'a>(name: &str, v: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
    v.as_deref().ok_or_else(|| CliError::Usage(format!("missing `{name}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisymForwardConfig {
    pub radius_mm: Option<f64>,
    pub sample: Option<usize>,
    pub order: usize,
    /// Radius-normalised coefficients, highest power first: `ε_rr = Σ f[i] (r/R)^{l−1−i}`.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub points: usize,
    pub noise_mpa: f64,
    pub seed: u64,
}

impl Default for AxisymForwardConfig {
    fn default() -> Self {
        AxisymForwardConfig {
            radius_mm: None,
            sample: Some(1),
            order: 5,
            f: vec![0.0, 0.0, 2e-3, 0.0, -5e-4],
            g: vec![0.0, 0.0, 1e-3, 0.0, -5e-4],
            h: vec![0.0, 0.0, 1.5e-3, 0.0, 0.0],
            points: 31,
            noise_mpa: 0.0,
            seed: 1,
        }
    }
}

impl AxisymForwardConfig {
    pub fn radius(&self) -> Result<f64, CliError> {
        cylinder_radius(self.radius_mm, self.sample)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        at_least("order", self.order, 1)?;
        at_least("points", self.points, 2)?;
        for (name, c) in [("f", &self.f), ("g", &self.g), ("h", &self.h)] {
            if c.len() != self.order {
                return Err(CliError::Usage(format!("`{name}` needs {} coefficients, got {}", self.order, c.len())));
            }
        }
        if !(self.noise_mpa.is_finite() && self.noise_mpa >= 0.0) {
            return Err(CliError::Usage(format!("noise_mpa must be non-negative, got {}", self.noise_mpa)));
        }
        self.radius().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisymFitConfig {
    pub input: Option<PathBuf>,
    pub radius_mm: Option<f64>,
    pub sample: Option<usize>,
    pub order: usize,
    pub exclude_null: bool,
    pub zero_linear: bool,
    pub rcond: Option<f64>,
    pub curve_points: usize,
}

impl Default for AxisymFitConfig {
    fn default() -> Self {
        AxisymFitConfig {
            input: None,
            radius_mm: None,
            sample: None,
            order: 5,
            exclude_null: true,
            zero_linear: false,
            rcond: None,
            curve_points: 101,
        }
    }
}

impl AxisymFitConfig {
    pub fn radius(&self) -> Result<f64, CliError> {
        cylinder_radius(self.radius_mm, self.sample)
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        required("input", &self.input)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        at_least("order", self.order, 1)?;
        at_least("curve_points", self.curve_points, 2)?;
        if let Some(r) = self.rcond {
            positive("rcond", r)?;
        }
        self.input()?;
        self.radius().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisymFitD0Config {
    pub input: Option<PathBuf>,
    pub radius_mm: Option<f64>,
    pub sample: Option<usize>,
    pub order: usize,
    pub d0_order: usize,
    /// Reference lattice spacing (Å).
    pub d0_ref_a: Option<f64>,
    pub exclude_null: bool,
    pub max_iterations: usize,
    pub curve_points: usize,
}

impl Default for AxisymFitD0Config {
    fn default() -> Self {
        AxisymFitD0Config {
            input: None,
            radius_mm: None,
            sample: None,
            order: 5,
            d0_order: 2,
            d0_ref_a: None,
            exclude_null: true,
            max_iterations: 200,
            curve_points: 101,
        }
    }
}

impl AxisymFitD0Config {
    pub fn radius(&self) -> Result<f64, CliError> {
        cylinder_radius(self.radius_mm, self.sample)
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        required("input", &self.input)
    }

    pub fn d0_ref(&self) -> Result<f64, CliError> {
        let d = self.d0_ref_a.ok_or_else(|| CliError::Usage("missing `d0_ref_a`".into()))?;
        positive("d0_ref_a", d).map(|d| d / 1e10)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        at_least("order", self.order, 1)?;
        at_least("max_iterations", self.max_iterations, 1)?;
        at_least("curve_points", self.curve_points, 2)?;
        self.input()?;
        self.d0_ref()?;
        self.radius().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CubeFitConfig {
    pub input: Option<PathBuf>,
    pub half_size_mm: f64,
    pub z_order: usize,
    pub plane_terms: usize,
    pub rcond: Option<f64>,
    pub heatmap_n: usize,
    pub profile_points: usize,
}

impl Default for CubeFitConfig {
    fn default() -> Self {
        CubeFitConfig { input: None, half_size_mm: 8.5, z_order: 3, plane_terms: 4, rcond: None, heatmap_n: 41, profile_points: 101 }
    }
}

impl CubeFitConfig {
    pub fn input(&self) -> Result<&Path, CliError> {
        required("input", &self.input)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("half_size_mm", self.half_size_mm)?;
        at_least("z_order", self.z_order, 1)?;
        at_least("plane_terms", self.plane_terms, 1)?;
        at_least("heatmap_n", self.heatmap_n, 2)?;
        at_least("profile_points", self.profile_points, 2)?;
        if let Some(r) = self.rcond {
            positive("rcond", r)?;
        }
        self.input().map(|_| ())
    }
}

/// Where a cube stress field comes from: a grid CSV at the mesh nodes, or a Maxwell potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub input: Option<PathBuf>,
    pub half_size_mm: f64,
    /// Cells per axis.
    pub n: usize,
    pub z_order: usize,
    pub plane_terms: usize,
    /// Potential coefficients (MPa), `[a; b]` row-major.
    pub coefficients_mpa: Vec<f64>,
    /// `identity` or `stiffness`.
    pub weight: String,
    /// `zero_flux` or `zero_displacement`.
    pub mode: String,
    /// Also fit the Maxwell inverse eigenstrain (potential sources only).
    pub maxwell_inverse: bool,
    pub inverse_z_order: usize,
    pub inverse_plane_terms: usize,
    pub heatmap_n: usize,
    /// Displacement amplitude (mm) of an added boundary bubble (lrt-sim).
    pub contamination_mm: f64,
    pub pixels: usize,
    pub directions: Vec<[f64; 3]>,
    /// `cell_exact` or `trapezoid`.
    pub quadrature: String,
    pub trapezoid_fraction: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            input: None,
            half_size_mm: 8.5,
            n: 16,
            z_order: 1,
            plane_terms: 2,
            coefficients_mpa: vec![400.0, 200.0, -300.0, 100.0],
            weight: "identity".into(),
            mode: "zero_flux".into(),
            maxwell_inverse: true,
            inverse_z_order: 3,
            inverse_plane_terms: 4,
            heatmap_n: 41,
            contamination_mm: 0.0,
            pixels: 32,
            directions: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
            quadrature: "cell_exact".into(),
            trapezoid_fraction: 0.5,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("half_size_mm", self.half_size_mm)?;
        at_least("n", self.n, 1)?;
        at_least("z_order", self.z_order, 1)?;
        at_least("plane_terms", self.plane_terms, 1)?;
        at_least("inverse_z_order", self.inverse_z_order, 1)?;
        at_least("inverse_plane_terms", self.inverse_plane_terms, 1)?;
        at_least("heatmap_n", self.heatmap_n, 2)?;
        at_least("pixels", self.pixels, 1)?;
        positive("trapezoid_fraction", self.trapezoid_fraction)?;
        if self.input.is_none() && self.coefficients_mpa.len() != 2 * self.z_order * self.plane_terms {
            return Err(CliError::Usage(format!(
                "coefficients_mpa needs {} values for z_order = {} and plane_terms = {}",
                2 * self.z_order * self.plane_terms,
                self.z_order,
                self.plane_terms
            )));
        }
        if !matches!(self.weight.as_str(), "identity" | "stiffness") {
            return Err(CliError::Usage(format!("weight must be identity or stiffness, got `{}`", self.weight)));
        }
        if !matches!(self.mode.as_str(), "zero_flux" | "zero_displacement") {
            return Err(CliError::Usage(format!("mode must be zero_flux or zero_displacement, got `{}`", self.mode)));
        }
        if !matches!(self.quadrature.as_str(), "cell_exact" | "trapezoid") {
            return Err(CliError::Usage(format!("quadrature must be cell_exact or trapezoid, got `{}`", self.quadrature)));
        }
        if self.directions.is_empty() || self.directions.iter().any(|d| d.iter().all(|c| *c == 0.0)) {
            return Err(CliError::Usage("directions must be a non-empty list of non-zero vectors".into()));
        }
        if !self.contamination_mm.is_finite() {
            return Err(CliError::Usage("contamination_mm must be finite".into()));
        }
        Ok(())
    }

    pub fn half_size(&self) -> f64 {
        self.half_size_mm / 1e3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkCheckConfig {
    pub half_size_mm: f64,
    pub z_order: usize,
    pub plane_terms: usize,
    pub coefficients_mpa: Vec<f64>,
    pub meshes: Vec<usize>,
    pub contamination_mm: f64,
    pub rays: usize,
}

impl Default for LinkCheckConfig {
    fn default() -> Self {
        LinkCheckConfig {
            half_size_mm: 8.5,
            z_order: 1,
            plane_terms: 2,
            coefficients_mpa: vec![400.0, 200.0, -300.0, 100.0],
            meshes: vec![8, 16],
            contamination_mm: 0.01,
            rays: 1000,
        }
    }
}

impl LinkCheckConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("half_size_mm", self.half_size_mm)?;
        at_least("z_order", self.z_order, 1)?;
        at_least("plane_terms", self.plane_terms, 1)?;
        at_least("rays", self.rays, 1)?;
        if !self.contamination_mm.is_finite() {
            return Err(CliError::Usage("contamination_mm must be finite".into()));
        }
        if self.meshes.is_empty() || self.meshes.contains(&0) {
            return Err(CliError::Usage("meshes must list positive cell counts".into()));
        }
        if self.coefficients_mpa.len() != 2 * self.z_order * self.plane_terms {
            return Err(CliError::Usage(format!("coefficients_mpa needs {} values", 2 * self.z_order * self.plane_terms)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub material: MaterialConfig,
    pub axisym_forward: AxisymForwardConfig,
    pub axisym_fit: AxisymFitConfig,
    pub axisym_fit_d0: AxisymFitD0Config,
    pub cube_fit: CubeFitConfig,
    pub decompose: FieldConfig,
    pub lrt_sim: FieldConfig,
    pub link_check: LinkCheckConfig,
}

const MATERIAL_KEYS: [&str; 3] = ["preset", "youngs_modulus_gpa", "poisson_ratio"];

fn parse_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

/// Applies `key=value` overrides to a parsed configuration table. Bare keys go to
/// `section` (or `[material]` for material keys); `table.key` addresses any table.
pub fn apply_overrides(table: &mut toml::Table, section: &str, overrides: &[(String, String)]) -> Result<(), CliError> {
    for (key, value) in overrides {
        let key = key.replace('-', "_");
        let (sec, name) = match key.split_once('.') {
            Some((s, n)) => (s.to_string(), n.to_string()),
            None if MATERIAL_KEYS.contains(&key.as_str()) => ("material".to_string(), key.clone()),
            None => (section.to_string(), key.clone()),
        };
        if name.is_empty() || sec.is_empty() {
            return Err(CliError::Usage(format!("malformed override `{key}`")));
        }
        let entry = table.entry(sec.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let sub = entry.as_table_mut().ok_or_else(|| CliError::Usage(format!("`{sec}` is not a table")))?;
        sub.insert(name, parse_value(value));
    }
    Ok(())
}

/// Reads the optional config file, applies overrides and deserialises.
/// Returns the configuration and the merged table.
pub fn load(path: Option<&Path>, section: &str, overrides: &[(String, String)]) -> Result<(RunConfig, toml::Table), CliError> {
    let mut table = match path {
        Some(p) => {
            let bytes = eigenstrain::io::read_file(p).map_err(CliError::Lib)?;
            let text = String::from_utf8(bytes).map_err(|_| CliError::Config(format!("{}: not UTF-8", p.display())))?;
            toml::from_str::<toml::Table>(&text).map_err(|e| CliError::Config(format!("{}: {}", p.display(), e.message())))?
        }
        None => toml::Table::new(),
    };
    apply_overrides(&mut table, section, overrides)?;
    let cfg: RunConfig = toml::Value::Table(table.clone()).try_into().map_err(|e: toml::de::Error| CliError::Usage(e.message().to_string()))?;
    Ok((cfg, table))
}

/// Relative paths in a config file are resolved against its directory.
pub fn resolve_path(config: Option<&Path>, p: &Path) -> PathBuf {
    match config.and_then(Path::parent) {
        Some(dir) if p.is_relative() && !dir.as_os_str().is_empty() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_route_to_sections() {
        let mut t = toml::from_str::<toml::Table>("[axisym_fit]\norder = 3\n").unwrap();
        let ov = vec![
            ("order".to_string(), "6".to_string()),
            ("poisson-ratio".to_string(), "0.3".to_string()),
            ("cube_fit.input".to_string(), "grid.csv".to_string()),
            ("exclude_null".to_string(), "false".to_string()),
        ];
        apply_overrides(&mut t, "axisym_fit", &ov).unwrap();
        let cfg: RunConfig = toml::Value::Table(t).try_into().unwrap();
        assert_eq!(cfg.axisym_fit.order, 6);
        assert!(!cfg.axisym_fit.exclude_null);
        assert_eq!(cfg.material.poisson_ratio, Some(0.3));
        assert_eq!(cfg.cube_fit.input, Some(PathBuf::from("grid.csv")));
    }

    #[test]
    fn material_resolution() {
        let m = MaterialConfig::default().resolve("inconel_718").unwrap();
        assert_eq!(m.youngs_modulus(), 208e9);
        let m = MaterialConfig { preset: Some("tin_bronze".into()), poisson_ratio: Some(0.3), ..Default::default() }.resolve("inconel_718").unwrap();
        assert_eq!((m.youngs_modulus(), m.poisson_ratio()), (130e9, 0.3));
        assert!(MaterialConfig { poisson_ratio: Some(0.5), ..Default::default() }.resolve("tin_bronze").is_err());
        assert!(MaterialConfig { preset: Some("steel".into()), ..Default::default() }.resolve("tin_bronze").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t = toml::from_str::<toml::Table>("[axisym_fit]\nordr = 3\n").unwrap();
        assert!(toml::Value::Table(t).try_into::<RunConfig>().is_err());
    }

    #[test]
    fn default_forward_field_is_valid() {
        AxisymForwardConfig::default().validate().unwrap();
        FieldConfig::default().validate().unwrap();
        LinkCheckConfig::default().validate().unwrap();
    }
}
