//! File formats: columnar CSV in reporting units (mm, MPa, Å), deterministic JSON and SVG.
//!
//! Values are written with 17 significant digits and converted between units by
//! shifting the decimal exponent of the text, so write/parse round trips are bit-exact.

pub mod json;
pub mod svg;

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::axisym::{AxisymStressProfile, LatticeProfile};
use crate::grid::GridTensorField;
use crate::lrt::ProjectionImage;
use crate::maxwell::StressSampleSet;
use crate::tensor::SymTensor2;
use crate::{Error, Result};

pub use json::to_json_string;

/// Reporting unit of a CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Millimetre,
    Megapascal,
    Angstrom,
    /// Dimensionless or already SI.
    One,
}

impl Unit {
    /// Decimal exponent `k` with `value_file = value_SI × 10^k`.
    pub fn decimal_shift(self) -> i32 {
        match self {
            Unit::Millimetre => 3,
            Unit::Megapascal => -6,
            Unit::Angstrom => 10,
            Unit::One => 0,
        }
    }

    /// Parses a file value and converts it to SI by shifting its decimal exponent,
    /// so the result is the correctly rounded SI value of the written decimal.
    pub fn parse_si(self, text: &str) -> Option<f64> {
        let v: f64 = text.parse().ok()?;
        if !v.is_finite() || self == Unit::One {
            return Some(v);
        }
        let (mant, exp) = match text.find(['e', 'E']) {
            Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
            None => (text, 0),
        };
        format!("{mant}e{}", exp - self.decimal_shift()).parse().ok()
    }

    /// Approximate numeric conversion (one rounding).
    pub fn to_si(self, v: f64) -> f64 {
        v / 10f64.powi(self.decimal_shift())
    }
}

/// 17 significant digits of `x` in file units (exact decimal shift); `NaN` for non-finite values.
pub fn format_value(x: f64, unit: Unit) -> String {
    if !x.is_finite() {
        return "NaN".into();
    }
    let s = format!("{x:.16e}");
    if x == 0.0 {
        return s;
    }
    let i = s.find('e').expect("exponent form");
    let exp: i32 = s[i + 1..].parse().expect("integer exponent");
    format!("{}e{}", &s[..i], exp + unit.decimal_shift())
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut buf)).map_err(|e| io_err(path, e))?;
    Ok(buf)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).and_then(|mut f| f.write_all(contents)).map_err(|e| io_err(path, e))
}

/// Numeric columns of a CSV file (converted to SI) with the source line of every row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: HashMap<String, Vec<f64>>,
    pub lines: Vec<usize>,
}

impl Table {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.get(name).map(Vec::as_slice)
    }

    fn take(&mut self, name: &str) -> Vec<f64> {
        self.columns.remove(name).unwrap_or_default()
    }
}

/// Unit implied by a column-name suffix.
pub fn column_unit(name: &str) -> Unit {
    if name.ends_with("_mm") {
        Unit::Millimetre
    } else if name.ends_with("_MPa") {
        Unit::Megapascal
    } else if name.ends_with("_A") {
        Unit::Angstrom
    } else {
        Unit::One
    }
}

/// Parses `required` columns (and any of `optional` that are present) as numbers in
/// SI units, using the unit suffix of each column name.
/// Blank lines are skipped; every error names the file and line.
pub fn parse_table(data: &[u8], label: &str, required: &[&str], optional: &[&str]) -> Result<Table> {
    let perr = |line: usize, message: String| Error::Parse { path: label.to_string(), line, message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(data);
    let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    let header_line = rdr.position().line().max(1) as usize;
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut wanted = Vec::new();
    for name in required {
        let idx = find(name).ok_or_else(|| perr(header_line, format!("missing column `{name}`")))?;
        wanted.push((name.to_string(), idx));
    }
    for name in optional {
        if let Some(idx) = find(name) {
            wanted.push((name.to_string(), idx));
        }
    }
    let mut table = Table { columns: wanted.iter().map(|(n, _)| (n.clone(), Vec::new())).collect(), lines: Vec::new() };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| line_of(data, p.byte()));
            perr(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| line_of(data, p.byte()));
        if rec.iter().all(str::is_empty) {
            continue;
        }
        for (name, idx) in &wanted {
            let cell = rec.get(*idx).unwrap_or("");
            let v = column_unit(name)
                .parse_si(cell)
                .ok_or_else(|| perr(line, format!("column `{name}`: `{cell}` is not a number")))?;
            table.columns.get_mut(name).expect("column registered").push(v);
        }
        table.lines.push(line);
    }
    Ok(table)
}

/// 1-based line of the first non-blank byte at or after `byte`.
fn line_of(data: &[u8], byte: u64) -> usize {
    let mut b = (byte as usize).min(data.len());
    while b < data.len() && matches!(data[b], b'\n' | b'\r') {
        b += 1;
    }
    1 + data[..b].iter().filter(|&&c| c == b'\n').count()
}

const PROFILE_STRESS: [&str; 3] = ["sigma_rr_MPa", "sigma_tt_MPa", "sigma_zz_MPa"];
const PROFILE_UNC: [&str; 3] = ["u_rr_MPa", "u_tt_MPa", "u_zz_MPa"];
const LATTICE: [&str; 3] = ["d_rr_A", "d_tt_A", "d_zz_A"];

fn empty_error(label: &str) -> Error {
    Error::Parse { path: label.into(), line: 1, message: "file has a header but no data rows".into() }
}

fn radius_check(label: &str, t: &Table, r: &[f64], radius: Option<f64>) -> Result<()> {
    if let Some(big_r) = radius {
        for (k, ri) in r.iter().enumerate() {
            if ri.abs() > big_r * (1.0 + 1e-12) {
                return Err(Error::Parse {
                    path: label.into(),
                    line: t.lines[k],
                    message: format!("|r| = {} mm exceeds the radius {} mm", ri.abs() * 1e3, big_r * 1e3),
                });
            }
        }
    }
    Ok(())
}

fn optional_triplet(t: &mut Table, names: [&str; 3]) -> Option<[Vec<f64>; 3]> {
    if names.iter().all(|n| t.columns.contains_key(*n)) {
        Some(names.map(|n| t.take(n)))
    } else {
        None
    }
}

/// Radial stress profile; radii are folded about the axis and checked against `radius`.
pub fn parse_profile(data: &[u8], label: &str, radius: Option<f64>) -> Result<AxisymStressProfile> {
    let mut req = vec!["r_mm"];
    req.extend(PROFILE_STRESS);
    let mut t = parse_table(data, label, &req, &PROFILE_UNC)?;
    if t.is_empty() {
        return Err(empty_error(label));
    }
    let r: Vec<f64> = t.take("r_mm");
    radius_check(label, &t, &r, radius)?;
    let unc = optional_triplet(&mut t, PROFILE_UNC);
    let [s_rr, s_tt, s_zz] = PROFILE_STRESS.map(|n| t.take(n));
    AxisymStressProfile::new(r, s_rr, s_tt, s_zz, unc)
}

pub fn parse_profile_csv(path: &Path, radius: Option<f64>) -> Result<AxisymStressProfile> {
    parse_profile(&read_file(path)?, &path.display().to_string(), radius)
}

pub fn profile_to_csv(p: &AxisymStressProfile) -> String {
    let mut out = String::from("r_mm,sigma_rr_MPa,sigma_tt_MPa,sigma_zz_MPa");
    if p.uncertainty.is_some() {
        out.push_str(",u_rr_MPa,u_tt_MPa,u_zz_MPa");
    }
    out.push('\n');
    for k in 0..p.len() {
        let mut row = vec![
            format_value(p.r[k], Unit::Millimetre),
            format_value(p.sigma_rr[k], Unit::Megapascal),
            format_value(p.sigma_tt[k], Unit::Megapascal),
            format_value(p.sigma_zz[k], Unit::Megapascal),
        ];
        if let Some(u) = &p.uncertainty {
            row.extend(u.iter().map(|c| format_value(c[k], Unit::Megapascal)));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_profile_csv(path: &Path, p: &AxisymStressProfile) -> Result<()> {
    write_file(path, profile_to_csv(p).as_bytes())
}

/// Lattice-spacing profile `r_mm, d_rr_A, d_tt_A, d_zz_A` with optional stress-space uncertainties.
pub fn parse_lattice(data: &[u8], label: &str, radius: Option<f64>) -> Result<LatticeProfile> {
    let mut req = vec!["r_mm"];
    req.extend(LATTICE);
    let mut t = parse_table(data, label, &req, &PROFILE_UNC)?;
    if t.is_empty() {
        return Err(empty_error(label));
    }
    let r: Vec<f64> = t.take("r_mm");
    radius_check(label, &t, &r, radius)?;
    let unc = optional_triplet(&mut t, PROFILE_UNC);
    let [a, b, c] = LATTICE.map(|n| t.take(n));
    LatticeProfile::new(r, a, b, c, unc)
}

pub fn parse_lattice_csv(path: &Path, radius: Option<f64>) -> Result<LatticeProfile> {
    parse_lattice(&read_file(path)?, &path.display().to_string(), radius)
}

pub fn lattice_to_csv(p: &LatticeProfile) -> String {
    let mut out = String::from("r_mm,d_rr_A,d_tt_A,d_zz_A");
    if p.uncertainty.is_some() {
        out.push_str(",u_rr_MPa,u_tt_MPa,u_zz_MPa");
    }
    out.push('\n');
    for k in 0..p.r.len() {
        let mut row = vec![format_value(p.r[k], Unit::Millimetre)];
        row.extend([p.d_rr[k], p.d_tt[k], p.d_zz[k]].map(|d| format_value(d, Unit::Angstrom)));
        if let Some(u) = &p.uncertainty {
            row.extend(u.iter().map(|c| format_value(c[k], Unit::Megapascal)));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

const COMPONENTS: [&str; 6] = ["xx", "yy", "zz", "xy", "yz", "xz"];
const POINT_COLS: [&str; 3] = ["x_mm", "y_mm", "z_mm"];

fn tensor_columns(prefix: &str, unit: Option<&str>) -> [String; 6] {
    COMPONENTS.map(|c| match unit {
        Some(u) => format!("{prefix}_{c}_{u}"),
        None => format!("{prefix}_{c}"),
    })
}

/// Stress samples on a grid, with warnings for duplicated points.
#[derive(Debug, Clone)]
pub struct GridSamples {
    pub samples: StressSampleSet,
    pub warnings: Vec<String>,
}

/// `x_mm, y_mm, z_mm, sigma_{xx..xz}_MPa` plus optional `u_{xx..xz}_MPa`.
pub fn parse_grid(data: &[u8], label: &str, half_size: f64) -> Result<GridSamples> {
    let sig = tensor_columns("sigma", Some("MPa"));
    let unc = tensor_columns("u", Some("MPa"));
    let mut req: Vec<&str> = POINT_COLS.to_vec();
    req.extend(sig.iter().map(String::as_str));
    let opt: Vec<&str> = unc.iter().map(String::as_str).collect();
    let mut t = parse_table(data, label, &req, &opt)?;
    if t.is_empty() {
        return Err(empty_error(label));
    }
    let [x, y, z] = POINT_COLS.map(|n| t.take(n));
    let points: Vec<[f64; 3]> = (0..t.len()).map(|k| [x[k], y[k], z[k]]).collect();
    let tol = half_size * (1.0 + 1e-12);
    if let Some(k) = points.iter().position(|p| p.iter().any(|v| v.abs() > tol)) {
        return Err(Error::Parse {
            path: label.into(),
            line: t.lines[k],
            message: format!("point ({}, {}, {}) mm lies outside the cube of half-size {} mm", x[k] * 1e3, y[k] * 1e3, z[k] * 1e3, half_size * 1e3),
        });
    }
    let cols: Vec<Vec<f64>> = sig.iter().map(|n| t.take(n)).collect();
    let sigma = (0..t.len()).map(|k| SymTensor2::from_array(std::array::from_fn(|c| cols[c][k]))).collect();
    let uncertainty = if unc.iter().all(|n| t.columns.contains_key(n)) {
        let u: Vec<Vec<f64>> = unc.iter().map(|n| t.take(n)).collect();
        Some((0..t.len()).map(|k| std::array::from_fn(|c| u[c][k])).collect())
    } else {
        None
    };
    let mut warnings = Vec::new();
    let mut seen: HashMap<[u64; 3], usize> = HashMap::new();
    for (k, p) in points.iter().enumerate() {
        if let Some(first) = seen.insert(p.map(f64::to_bits), k) {
            warnings.push(format!("{label}: line {} repeats the point of line {}; both are kept", t.lines[k], t.lines[first]));
        }
    }
    Ok(GridSamples { samples: StressSampleSet::new(points, sigma, uncertainty, half_size)?, warnings })
}

pub fn parse_grid_csv(path: &Path, half_size: f64) -> Result<GridSamples> {
    parse_grid(&read_file(path)?, &path.display().to_string(), half_size)
}

/// Point-wise tensors as CSV. Stress columns are `sigma_*_MPa`; any other prefix is
/// written dimensionless (`eps_xx`, ...).
pub fn tensors_to_csv(points: &[[f64; 3]], values: &[SymTensor2], prefix: &str) -> String {
    let stress = prefix == "sigma";
    let (unit, vu) = if stress { (Some("MPa"), Unit::Megapascal) } else { (None, Unit::One) };
    let mut out = POINT_COLS.join(",");
    for c in tensor_columns(prefix, unit) {
        out.push(',');
        out.push_str(&c);
    }
    out.push('\n');
    for (p, v) in points.iter().zip(values) {
        let mut row: Vec<String> = p.iter().map(|x| format_value(*x, Unit::Millimetre)).collect();
        row.extend(v.to_array().iter().map(|x| format_value(*x, vu)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn samples_to_csv(s: &StressSampleSet) -> String {
    let mut out = tensors_to_csv(&s.points, &s.sigma, "sigma");
    if let Some(u) = &s.uncertainty {
        let mut lines: Vec<String> = out.lines().map(String::from).collect();
        lines[0].push_str(&tensor_columns("u", Some("MPa")).iter().fold(String::new(), |a, c| a + "," + c));
        for (line, uk) in lines[1..].iter_mut().zip(u) {
            for v in uk {
                line.push(',');
                line.push_str(&format_value(*v, Unit::Megapascal));
            }
        }
        out = lines.join("\n") + "\n";
    }
    out
}

pub fn field_to_csv(f: &GridTensorField, prefix: &str) -> String {
    tensors_to_csv(&f.sample_points(), &f.values, prefix)
}

/// Projection pixels: `u_mm, v_mm, lrt_mm, path_mm, mean` (mean is `NaN` off the box).
pub fn projection_to_csv(img: &ProjectionImage) -> String {
    let mut out = String::from("u_mm,v_mm,lrt_mm,path_mm,mean\n");
    let g = &img.geometry;
    for j in 0..g.nv {
        for i in 0..g.nu {
            let k = j * g.nu + i;
            let [u, v] = img.pixel_coords(i, j);
            let row = [
                format_value(u, Unit::Millimetre),
                format_value(v, Unit::Millimetre),
                format_value(img.value[k], Unit::Millimetre),
                format_value(img.path_length[k], Unit::Millimetre),
                format_value(img.average[k], Unit::One),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_round_trip_is_exact() {
        let xs = [0.1e-3, 1.1e-3, 1.499_999_999e-3, 0.3, -7.77e-4, 1e-20, 123.456];
        for unit in [Unit::Millimetre, Unit::Megapascal, Unit::Angstrom, Unit::One] {
            for x in xs {
                let s = format_value(x, unit);
                let back = unit.parse_si(&s).unwrap();
                assert_eq!(back.to_bits(), x.to_bits(), "{unit:?} {x:e} -> {s}");
            }
        }
        assert_eq!(format_value(3.5e8, Unit::Megapascal), "3.5000000000000000e2");
        assert_eq!(Unit::Megapascal.parse_si("10"), Some(1e7));
        assert_eq!(Unit::Millimetre.parse_si("-1.5E0"), Some(-1.5e-3));
        assert_eq!(Unit::Millimetre.parse_si("x"), None);
        let mut rng = 0x2545_f491_4f6c_dd1d_u64;
        for _ in 0..20000 {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            let x = f64::from_bits(rng >> 2);
            if x.is_finite() && x.abs() < 1e290 && x.abs() > 1e-290 {
                for unit in [Unit::Millimetre, Unit::Megapascal, Unit::Angstrom] {
                    assert_eq!(unit.parse_si(&format_value(x, unit)).unwrap().to_bits(), x.to_bits());
                }
            }
        }
    }

    #[test]
    fn profile_folding_and_errors() {
        let csv = "r_mm,sigma_rr_MPa,sigma_tt_MPa,sigma_zz_MPa\n-1.0,10,20,30\n1.0,10,20,30\n";
        let p = parse_profile(csv.as_bytes(), "p.csv", Some(1.5e-3)).unwrap();
        assert_eq!(p.r, vec![1e-3, 1e-3]);
        assert_eq!(p.sigma_tt, vec![2e7, 2e7]);
        assert!(p.uncertainty.is_none());

        let header_only = "r_mm,sigma_rr_MPa,sigma_tt_MPa,sigma_zz_MPa\n";
        assert!(matches!(parse_profile(header_only.as_bytes(), "p.csv", None), Err(Error::Parse { .. })));

        let missing = "r_mm,sigma_rr_MPa,sigma_zz_MPa\n0,1,2\n";
        match parse_profile(missing.as_bytes(), "p.csv", None) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("sigma_tt_MPa")),
            other => panic!("{other:?}"),
        }
        let bad = "r_mm,sigma_rr_MPa,sigma_tt_MPa,sigma_zz_MPa\n0,1,2,3\n0.5,1,x,3\n";
        match parse_profile(bad.as_bytes(), "p.csv", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let outside = "r_mm,sigma_rr_MPa,sigma_tt_MPa,sigma_zz_MPa\n0,1,2,3\n\n2.0,1,2,3\n";
        match parse_profile(outside.as_bytes(), "p.csv", Some(1.5e-3)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profile_round_trip_is_bit_exact() {
        let r: Vec<f64> = (0..7).map(|k| 1.5e-3 * k as f64 / 6.0).collect();
        let s = |a: f64| r.iter().map(|x| a * (1.0 - x * x / 2.25e-6) + 1.0 / 3.0).collect::<Vec<f64>>();
        let unc = Some([vec![1e6; 7], vec![2e6; 7], vec![3.3e6; 7]]);
        let p = AxisymStressProfile::new(r.clone(), s(1e8), s(-2.1e8), s(3.7e7), unc).unwrap();
        let back = parse_profile(profile_to_csv(&p).as_bytes(), "rt", Some(1.5e-3)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn grid_bounds_and_duplicates() {
        let mut csv = String::from("x_mm,y_mm,z_mm,sigma_xx_MPa,sigma_yy_MPa,sigma_zz_MPa,sigma_xy_MPa,sigma_yz_MPa,sigma_xz_MPa\n");
        csv.push_str("0,1,2,1,2,3,4,5,6\n0,1,2,1,2,3,4,5,6\n0,-7.5,7.5,0,0,0,0,0,0\n");
        let g = parse_grid(csv.as_bytes(), "g.csv", 8.5e-3).unwrap();
        assert_eq!(g.samples.len(), 3);
        assert_eq!(g.warnings.len(), 1);
        assert_eq!(g.samples.sigma[0].xy, 4e6);
        csv.push_str("0,9,0,0,0,0,0,0,0\n");
        match parse_grid(csv.as_bytes(), "g.csv", 8.5e-3) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_round_trip() {
        let pts = crate::maxwell::section_grid(8.5e-3, 1e-3, 8);
        let sig: Vec<SymTensor2> = pts.iter().map(|p| SymTensor2::new(p[1] * 1e10, p[2] * 3e9, 1.0 / 7.0, 0.0, p[1] * p[2] * 1e12, -5e5)).collect();
        let set = StressSampleSet::new(pts, sig, Some(vec![[1e6; 6]; 64]), 8.5e-3).unwrap();
        let back = parse_grid(samples_to_csv(&set).as_bytes(), "rt", 8.5e-3).unwrap();
        assert!(back.warnings.is_empty());
        assert_eq!(back.samples.points, set.points);
        assert_eq!(back.samples.sigma, set.sigma);
        assert_eq!(back.samples.uncertainty, set.uncertainty);
    }

    #[test]
    fn lattice_round_trip() {
        let p = LatticeProfile::new(vec![0.0, 5e-4, 1e-3], vec![3.6e-10, 3.61e-10, 3.599e-10], vec![3.6e-10; 3], vec![3.6001e-10; 3], None).unwrap();
        let back = parse_lattice(lattice_to_csv(&p).as_bytes(), "rt", None).unwrap();
        assert_eq!(back.r, p.r);
        assert_eq!(back.d_rr, p.d_rr);
        assert_eq!(back.d_zz, p.d_zz);
    }
}
