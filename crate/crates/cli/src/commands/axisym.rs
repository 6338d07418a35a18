//! Cylinder subcommands.

use eigenstrain::axisym::{
    fit_stress, fit_with_d0, forward_stress, AxisymForward, AxisymPolyField, AxisymStressProfile, D0Options, FitOptions,
};
use eigenstrain::io::svg::Series;
use eigenstrain::io::{parse_lattice, parse_profile, profile_to_csv};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::Normal;
use serde_json::{json, Value};

use super::{config_echo, linspace, material_json, plot, summary, value, Ctx};
use crate::{CliError, Command};

const COMPONENTS: [&str; 3] = ["rr", "θθ", "zz"];
const CURVE: usize = 201;

/// Raw and radius-normalised coefficients.
fn eigenstrain_json(e: &AxisymPolyField) -> Value {
    let l = e.order();
    let r = e.radius();
    let norm = |v: &[f64]| -> Vec<f64> { v.iter().enumerate().map(|(k, x)| x * r.powi((l - 1 - k) as i32)).collect() };
    json!({
        "order": l,
        "radius": r,
        "f": e.f(),
        "g": e.g(),
        "h": e.h(),
        "normalised": { "f": norm(e.f()), "g": norm(e.g()), "h": norm(e.h()) },
    })
}

fn stress_plot(title: &str, fw: &AxisymForward, measured: Option<&AxisymStressProfile>) -> String {
    let r = linspace(0.0, fw.radius, CURVE);
    let rmm: Vec<f64> = r.iter().map(|x| x * 1e3).collect();
    let mut series = Vec::new();
    for (c, name) in COMPONENTS.iter().enumerate() {
        let y = r.iter().map(|&x| fw.stress_at(x)[c] / 1e6).collect();
        series.push(Series::line(format!("σ_{name} model"), rmm.clone(), y, c));
        if let Some(p) = measured {
            let y = (0..p.len()).map(|k| p.at(k)[c] / 1e6).collect();
            series.push(Series::markers(format!("σ_{name} data"), p.r.iter().map(|x| x * 1e3).collect(), y, c));
        }
    }
    plot(title, "r (mm)", "stress (MPa)", series)
}

fn eigenstrain_plot(title: &str, e: &AxisymPolyField) -> String {
    let r = linspace(0.0, e.radius(), CURVE);
    let rmm: Vec<f64> = r.iter().map(|x| x * 1e3).collect();
    let series = COMPONENTS
        .iter()
        .enumerate()
        .map(|(c, name)| Series::line(format!("ε*_{name}"), rmm.clone(), r.iter().map(|&x| e.eval(x)[c]).collect(), c))
        .collect();
    plot(title, "r (mm)", "eigenstrain", series)
}

/// Boundary, equilibrium and axial-force identities of a forward solution.
fn identities(fw: &AxisymForward) -> Value {
    let eq = fw.equilibrium_residual();
    let r = linspace(fw.radius * 1e-3, fw.radius, CURVE);
    let smax = fw.max_abs_stress(CURVE);
    json!({
        "max_abs_stress": smax,
        "sigma_rr_at_surface": fw.stress_at(fw.radius)[0],
        "max_equilibrium_residual_scaled": r.iter().map(|&x| (eq.eval(x) * fw.radius).abs()).fold(0.0, f64::max),
        "axial_force_integral": fw.axial_force_integral(),
    })
}

pub fn forward(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.cfg.axisym_forward;
    c.validate()?;
    let m = ctx.cfg.material.resolve("tin_bronze")?;
    let radius = c.radius()?;
    let l = c.order;
    let raw = |v: &[f64]| -> Vec<f64> { v.iter().enumerate().map(|(k, x)| x / radius.powi((l - 1 - k) as i32)).collect() };
    let e = AxisymPolyField::new(l, radius, raw(&c.f), raw(&c.g), raw(&c.h))?;
    let fw = AxisymForward::solve(&e, &m)?;
    let r = linspace(0.0, radius, c.points);
    let mut profile = forward_stress(&e, &m, &r)?;
    if c.noise_mpa > 0.0 {
        let sd = c.noise_mpa * 1e6;
        let dist = Normal::new(0.0, sd).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut rng = StdRng::seed_from_u64(c.seed);
        for col in [&mut profile.sigma_rr, &mut profile.sigma_tt, &mut profile.sigma_zz] {
            for v in col.iter_mut() {
                *v += rng.sample(dist);
            }
        }
        profile.uncertainty = Some(std::array::from_fn(|_| vec![sd; r.len()]));
    }
    let mut out = ctx.output(Command::AxisymForward, vec![], config_echo(&ctx.cfg.material, "tin_bronze", &m, c));
    out.csv("axisym_forward_profile.csv", &profile_to_csv(&profile))?;
    out.svg("axisym_forward_stress.svg", &stress_plot("Forward stress profile", &fw, Some(&profile)))?;
    out.svg("axisym_forward_eigenstrain.svg", &eigenstrain_plot("Eigenstrain", &e))?;
    let result = json!({
        "material": material_json(&m),
        "eigenstrain": eigenstrain_json(&e),
        "solution": value(&fw.solution),
        "identities": identities(&fw),
        "noise_sd": c.noise_mpa * 1e6,
        "profile": value(&profile),
    });
    out.report("axisym_forward.json", result, vec![])?;
    Ok(summary(&out, &[format!("axisym-forward: {} samples on R = {} mm", r.len(), radius * 1e3)]))
}

pub fn fit(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.cfg.axisym_fit;
    c.validate()?;
    let m = ctx.cfg.material.resolve("tin_bronze")?;
    let radius = c.radius()?;
    let (path, data, info) = ctx.read(c.input()?)?;
    let profile = parse_profile(&data, &path.display().to_string(), Some(radius))?;
    let opts = FitOptions {
        exclude_null: c.exclude_null,
        zero_linear: c.zero_linear,
        rcond: c.rcond.unwrap_or(FitOptions::default().rcond),
    };
    let (e, report) = fit_stress(&profile, c.order, &m, radius, &opts)?;
    let fw = AxisymForward::solve(&e, &m)?;
    let model = forward_stress(&e, &m, &profile.r)?;
    let mut out = ctx.output(Command::AxisymFit, vec![info], config_echo(&ctx.cfg.material, "tin_bronze", &m, c));
    out.csv("axisym_fit_model.csv", &profile_to_csv(&model))?;
    out.svg("axisym_fit_stress.svg", &stress_plot("Fitted and measured stress", &fw, Some(&profile)))?;
    out.svg("axisym_fit_eigenstrain.svg", &eigenstrain_plot("Fitted eigenstrain", &e))?;
    let rel = report.relative_residual();
    let warnings = report.warnings.clone();
    let result = json!({
        "material": material_json(&m),
        "options": value(&opts),
        "eigenstrain": eigenstrain_json(&e),
        "relative_residual": rel,
        "report": value(&report),
        "identities": identities(&fw),
        "model": value(&model),
    });
    out.report("axisym_fit.json", result, warnings)?;
    Ok(summary(&out, &[format!("axisym-fit: {} samples, relative residual {rel:.3e}", profile.len())]))
}

pub fn fit_d0(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.cfg.axisym_fit_d0;
    c.validate()?;
    let m = ctx.cfg.material.resolve("tin_bronze")?;
    let radius = c.radius()?;
    let d0_ref = c.d0_ref()?;
    let (path, data, info) = ctx.read(c.input()?)?;
    let lat = parse_lattice(&data, &path.display().to_string(), Some(radius))?;
    let opts = D0Options {
        fit: FitOptions { exclude_null: c.exclude_null, ..FitOptions::default() },
        max_iterations: c.max_iterations,
        ..D0Options::default()
    };
    let (e, d0, report) = fit_with_d0(&lat, c.order, c.d0_order, d0_ref, &m, radius, &opts)?;
    let fw = AxisymForward::solve(&e, &m)?;
    let measured = lat.stress_profile(&d0, &m)?;
    let model = forward_stress(&e, &m, &lat.r)?;
    let mut warnings = report.fit.warnings.clone();
    if !report.converged {
        warnings.push(format!("d0 iteration stopped after {} iterations without meeting the tolerances", report.iterations));
    }
    let mut out = ctx.output(Command::AxisymFitD0, vec![info], config_echo(&ctx.cfg.material, "tin_bronze", &m, c));
    out.csv("axisym_fit_d0_measured.csv", &profile_to_csv(&measured))?;
    out.csv("axisym_fit_d0_model.csv", &profile_to_csv(&model))?;
    out.svg("axisym_fit_d0_stress.svg", &stress_plot("Stress with fitted d0", &fw, Some(&measured)))?;
    out.svg("axisym_fit_d0_eigenstrain.svg", &eigenstrain_plot("Fitted eigenstrain", &e))?;
    let r = linspace(0.0, radius, CURVE);
    let d0_curve = Series::line("d0", r.iter().map(|x| x * 1e3).collect(), r.iter().map(|&x| d0.eval(x) * 1e10).collect(), 0);
    out.svg("axisym_fit_d0_d0.svg", &super::plot("Reference lattice spacing", "r (mm)", "d0 (Å)", vec![d0_curve]))?;
    let rel = report.fit.relative_residual();
    let result = json!({
        "material": material_json(&m),
        "options": value(&opts),
        "eigenstrain": eigenstrain_json(&e),
        "d0": {
            "order": d0.order,
            "coefficients_angstrom": d0.c.iter().map(|v| v * 1e10).collect::<Vec<f64>>(),
            "d0_ref_angstrom": d0.d0_ref * 1e10,
            "radius": d0.radius,
        },
        "relative_residual": rel,
        "report": value(&report),
        "measured": value(&measured),
        "model": value(&model),
    });
    out.report("axisym_fit_d0.json", result, warnings)?;
    Ok(summary(&out, &[format!(
        "axisym-fit-d0: {} samples, {} iterations, relative residual {rel:.3e}",
        lat.len(),
        report.iterations
    )]))
}
