//! Maxwell stress-function fit on a cube.

use eigenstrain::io::svg::{HeatMap, Series};
use eigenstrain::io::{parse_grid, samples_to_csv};
use eigenstrain::lstsq::DEFAULT_RCOND;
use eigenstrain::maxwell::{build_symmetric_basis, field_diagnostics, fit_stress_field_rcond, MaxwellPotential, StressSampleSet};
use serde_json::json;

use super::{config_echo, linspace, material_json, plot, summary, value, Ctx};
use crate::{CliError, Command};

pub(crate) const VOIGT: [&str; 6] = ["xx", "yy", "zz", "xy", "yz", "xz"];

/// `x = 0` section of a tensor component, `y` across and `z` up.
pub(crate) fn section_map(title: &str, half_size: f64, n: usize, f: impl Fn([f64; 3]) -> Option<f64>) -> String {
    let t = linspace(-half_size, half_size, n);
    let mut values = Vec::with_capacity(n * n);
    for z in &t {
        for y in &t {
            values.push(f([0.0, *y, *z]).unwrap_or(f64::NAN));
        }
    }
    let l = half_size * 1e3;
    HeatMap { title: title.into(), nx: n, ny: n, values, extent: [-l, l, -l, l], x_label: "y (mm)".into(), y_label: "z (mm)".into() }.to_svg()
}

/// Six fitted components along one axis through the centre, with samples lying on it.
fn axis_profile(p: &MaxwellPotential, samples: &StressSampleSet, axis: usize, n: usize) -> String {
    let l = p.half_size;
    let t = linspace(-l, l, n);
    let point = |s: f64| {
        let mut x = [0.0; 3];
        x[axis] = s;
        x
    };
    let tol = 1e-9 * l;
    let on_axis: Vec<usize> = (0..samples.len())
        .filter(|&k| (0..3).all(|d| d == axis || samples.points[k][d].abs() <= tol))
        .collect();
    let name = ["x", "y", "z"][axis];
    let mut series = Vec::new();
    for (c, comp) in VOIGT.iter().enumerate() {
        let y = t.iter().map(|&s| p.stress(point(s)).to_array()[c] / 1e6).collect();
        series.push(Series::line(format!("σ_{comp} fit"), t.iter().map(|s| s * 1e3).collect(), y, c));
        if !on_axis.is_empty() {
            let xs = on_axis.iter().map(|&k| samples.points[k][axis] * 1e3).collect();
            let ys = on_axis.iter().map(|&k| samples.sigma[k].to_array()[c] / 1e6).collect();
            series.push(Series::markers(format!("σ_{comp} data"), xs, ys, c));
        }
    }
    plot(&format!("Stress along the {name} axis"), &format!("{name} (mm)"), "stress (MPa)", series)
}

pub fn fit(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.cfg.cube_fit;
    c.validate()?;
    let m = ctx.cfg.material.resolve("inconel_718")?;
    let l = c.half_size_mm / 1e3;
    let (path, data, info) = ctx.read(c.input()?)?;
    let grid = parse_grid(&data, &path.display().to_string(), l)?;
    let samples = grid.samples;
    let basis = build_symmetric_basis(c.z_order, c.plane_terms, l)?;
    let fit = fit_stress_field_rcond(&samples, &basis, c.rcond.unwrap_or(DEFAULT_RCOND))?;
    let diagnostics = field_diagnostics(&fit.fitted, 21)?;
    let mut warnings = grid.warnings;
    warnings.extend(fit.report.warnings.iter().cloned());
    let section: Vec<[f64; 3]> = linspace(-l, l, c.heatmap_n).iter().flat_map(|&z| linspace(-l, l, c.heatmap_n).into_iter().map(move |y| [0.0, y, z])).collect();
    if let Some(w) = fit.report.extrapolation_warning(&section) {
        warnings.push(format!("section maps: {w}"));
    }
    let fitted = StressSampleSet::from_potential(&fit.fitted, samples.points.clone())?;
    let mut out = ctx.output(Command::CubeFit, vec![info], config_echo(&ctx.cfg.material, "inconel_718", &m, c));
    out.csv("cube_fit_model.csv", &samples_to_csv(&fitted))?;
    for (k, comp) in VOIGT.iter().enumerate() {
        let svg = section_map(&format!("Fitted σ_{comp} on x = 0"), l, c.heatmap_n, |x| Some(fit.fitted.stress(x).to_array()[k]));
        out.svg(&format!("cube_fit_section_{comp}.svg"), &svg)?;
    }
    out.svg("cube_fit_profile_y.svg", &axis_profile(&fit.fitted, &samples, 1, c.profile_points))?;
    out.svg("cube_fit_profile_z.svg", &axis_profile(&fit.fitted, &samples, 2, c.profile_points))?;
    let rel = if fit.report.max_abs_measured > 0.0 {
        fit.report.residual_norm / (fit.report.max_abs_measured * ((6 * samples.len()) as f64).sqrt())
    } else {
        fit.report.residual_norm
    };
    let result = json!({
        "material": material_json(&m),
        "half_size": l,
        "samples": samples.len(),
        "relative_residual": rel,
        "report": value(&fit.report),
        "potential": value(&fit.fitted),
        "diagnostics": value(&diagnostics),
    });
    out.report("cube_fit.json", result, warnings)?;
    Ok(summary(&out, &[format!(
        "cube-fit: {} samples, design {}x{}, relative residual {rel:.3e}",
        samples.len(),
        fit.report.design_shape[0],
        fit.report.design_shape[1]
    )]))
}
