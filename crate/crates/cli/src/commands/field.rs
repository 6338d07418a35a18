//! Cube-field subcommands: decomposition, LRT projections and the link check.

use std::collections::HashSet;

use eigenstrain::decomp::{maxwell_inverse_eigenstrain, trivial_solution_checked, verify_energy_orthogonality};
use eigenstrain::fem::{forward_solve, helmholtz_decompose_weighted, BoundaryMode, SolverOptions};
use eigenstrain::grid::l2_norm;
use eigenstrain::io::svg::{HeatMap, Series};
use eigenstrain::io::{field_to_csv, parse_grid, projection_to_csv};
use eigenstrain::lrt::{self, boundary_bubble, simulate_projections, DetectorGeometry, LrtQuadrature};
use eigenstrain::maxwell::{build_symmetric_basis, MaxwellPotential};
use eigenstrain::{BoxMesh, Error, GridTensorField, GridVectorField, Sampling, Weight};
use serde_json::{json, Value};

use super::cube::{section_map, VOIGT};
use super::{config_echo, material_json, plot, summary, value, Ctx};
use crate::config::FieldConfig;
use crate::output::InputFile;
use crate::{CliError, Command};

struct Source {
    sigma: GridTensorField,
    potential: Option<MaxwellPotential>,
    inputs: Vec<InputFile>,
    warnings: Vec<String>,
}

fn potential(half_size: f64, z_order: usize, plane_terms: usize, coefficients_mpa: &[f64]) -> Result<MaxwellPotential, CliError> {
    let c: Vec<f64> = coefficients_mpa.iter().map(|v| v * 1e6).collect();
    Ok(MaxwellPotential::from_coefficients(half_size, z_order, plane_terms, &c)?)
}

/// Stress at the mesh nodes from a grid CSV, or at the Gauss points from a potential.
fn stress_source(ctx: &Ctx, c: &FieldConfig, mesh: &BoxMesh) -> Result<Source, CliError> {
    let l = c.half_size();
    let Some(input) = &c.input else {
        let p = potential(l, c.z_order, c.plane_terms, &c.coefficients_mpa)?;
        let sp = p.stress_polys();
        let sigma = GridTensorField::from_fn_gauss(mesh, |x| sp.eval(x));
        return Ok(Source { sigma, potential: Some(p), inputs: vec![], warnings: vec![] });
    };
    let (path, data, info) = ctx.read(input)?;
    let label = path.display().to_string();
    let grid = parse_grid(&data, &label, l)?;
    let spec = mesh.spec();
    let h = spec.spacing();
    let mut values = vec![None; spec.node_count()];
    for (k, p) in grid.samples.points.iter().enumerate() {
        let ijk: [usize; 3] = std::array::from_fn(|d| ((p[d] + l) / h[d]).round().max(0.0) as usize);
        let node = spec.node_index(ijk[0].min(spec.n[0]), ijk[1].min(spec.n[1]), ijk[2].min(spec.n[2]));
        let q = spec.node_coords(node);
        if (0..3).any(|d| (q[d] - p[d]).abs() > 1e-6 * h[d]) {
            return Err(Error::InvalidInput(format!(
                "{label}: sample {} at ({}, {}, {}) mm is not a node of the {n}³ mesh",
                k + 1,
                p[0] * 1e3,
                p[1] * 1e3,
                p[2] * 1e3,
                n = c.n
            ))
            .into());
        }
        if values[node].replace(grid.samples.sigma[k]).is_some() {
            return Err(Error::InvalidInput(format!("{label}: sample {} repeats a mesh node", k + 1)).into());
        }
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(Error::InvalidInput(format!("{label}: {missing} of {} mesh nodes have no sample", values.len())).into());
    }
    let sigma = GridTensorField::new(spec, Sampling::Nodal, values.into_iter().flatten().collect())?;
    Ok(Source { sigma, potential: None, inputs: vec![info], warnings: grid.warnings })
}

fn relative(a: &GridTensorField, b: &GridTensorField) -> Result<f64, CliError> {
    let s = l2_norm(b);
    let d = l2_norm(&a.sub(b)?);
    Ok(if s > 0.0 { d / s } else { d })
}

fn mesh_header(mesh: &BoxMesh) -> Value {
    json!({
        "half_size": mesh.half_size(),
        "cells": mesh.spec().n,
        "sampling": "gauss_2x2x2",
        "voigt_order": VOIGT,
        "shear": "tensor",
    })
}

pub fn decompose(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.cfg.decompose;
    c.validate()?;
    let m = ctx.cfg.material.resolve("inconel_718")?;
    let l = c.half_size();
    let mesh = BoxMesh::cube(l, c.n)?;
    let src = stress_source(ctx, c, &mesh)?;
    let weight = if c.weight == "stiffness" { Weight::Stiffness(m) } else { Weight::Identity };
    let mode = if c.mode == "zero_displacement" { BoundaryMode::ZeroDisplacement } else { BoundaryMode::ZeroFlux };
    let (trivial, equilibrium) = trivial_solution_checked(&src.sigma, &m)?;
    let d = helmholtz_decompose_weighted(&trivial, &mesh, mode, &weight, &SolverOptions::default())?;
    let trivial = trivial.to_gauss();
    let report = verify_energy_orthogonality(&d.potential, &d.solenoidal, &m, &mesh, Some(&trivial))?;
    let sigma = src.sigma.to_gauss();
    let sigma_trivial = forward_solve(&trivial, &m, &mesh)?.sigma;
    let sigma_solenoidal = forward_solve(&d.solenoidal, &m, &mesh)?.sigma;
    let mut warnings = src.warnings.clone();
    warnings.extend(equilibrium.warnings.iter().cloned());
    let maxwell = if c.maxwell_inverse {
        let basis = build_symmetric_basis(c.inverse_z_order, c.inverse_plane_terms, l)?;
        Some(maxwell_inverse_eigenstrain(&src.sigma, &basis, &m, &mesh)?)
    } else {
        None
    };

    let mut out = ctx.output(Command::Decompose, src.inputs.clone(), config_echo(&ctx.cfg.material, "inconel_718", &m, c));
    let fields = [("trivial", &trivial), ("potential", &d.potential), ("solenoidal", &d.solenoidal)];
    for (name, f) in fields {
        out.csv(&format!("decompose_{name}.csv"), &field_to_csv(f, "eps"))?;
    }
    out.csv("decompose_sigma_solenoidal.csv", &field_to_csv(&sigma_solenoidal, "sigma"))?;
    if let Some(mx) = &maxwell {
        out.csv("decompose_maxwell.csv", &field_to_csv(&mx.eigenstrain, "eps"))?;
    }
    let mut maps: Vec<(&str, &GridTensorField)> = fields.to_vec();
    if let Some(mx) = &maxwell {
        maps.push(("maxwell", &mx.eigenstrain));
    }
    for (name, f) in maps {
        for (k, comp) in VOIGT.iter().enumerate().filter(|(k, _)| *k != 3 && *k != 5) {
            let svg = section_map(&format!("{name} ε*_{comp} on x = 0"), l, c.heatmap_n, |x| f.eval(x).map(|t| t.to_array()[k]));
            out.svg(&format!("decompose_{name}_{comp}.svg"), &svg)?;
        }
    }
    let maxwell_json = match &maxwell {
        Some(mx) => json!({
            "coefficients": mx.coefficients,
            "potential": value(&mx.potential),
            "relative_residual": mx.relative_residual,
            "relative_difference_to_solenoidal": relative(&mx.eigenstrain, &d.solenoidal)?,
        }),
        None => Value::Null,
    };
    let err_sol = relative(&sigma_solenoidal, &sigma)?;
    let orthogonality = if c.weight == "stiffness" { report.orthogonality_residual } else { report.orthogonality_identity };
    let result = json!({
        "material": material_json(&m),
        "mesh": mesh_header(&mesh),
        "source": if src.potential.is_some() { "potential" } else { "grid" },
        "equilibrium": value(&equilibrium),
        "weight": c.weight,
        "orthogonality": orthogonality,
        "decomposition": value(&report),
        "solver_iterations": d.stats.iterations,
        "stress_error_trivial": relative(&sigma_trivial, &sigma)?,
        "stress_error_solenoidal": err_sol,
        "maxwell_inverse": maxwell_json,
    });
    out.report("decompose.json", result, warnings)?;
    Ok(summary(&out, &[format!(
        "decompose: {n}³ mesh, {} orthogonality {orthogonality:.3e}, stress error from solenoidal part {err_sol:.3e}",
        c.weight,
        n = c.n
    )]))
}

pub fn lrt_sim(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.cfg.lrt_sim;
    c.validate()?;
    let m = ctx.cfg.material.resolve("inconel_718")?;
    let l = c.half_size();
    let mesh = BoxMesh::cube(l, c.n)?;
    let src = stress_source(ctx, c, &mesh)?;
    let mut eps = src.sigma.map(|s| m.apply_compliance(s)).to_gauss();
    if c.contamination_mm != 0.0 {
        let bump = GridVectorField::from_fn(&mesh, boundary_bubble([l; 3], c.contamination_mm / 1e3)).symmetric_gradient();
        eps = eps.add(&bump)?;
    }
    let quad = if c.quadrature == "trapezoid" {
        LrtQuadrature::Trapezoid { fraction: c.trapezoid_fraction }
    } else {
        LrtQuadrature::CellExact
    };
    let geometry = DetectorGeometry::covering(&mesh.spec(), c.pixels)?;
    let images = simulate_projections(&eps, &geometry, &c.directions, quad)?;
    let mut out = ctx.output(Command::LrtSim, src.inputs.clone(), config_echo(&ctx.cfg.material, "inconel_718", &m, c));
    let mut summaries = Vec::new();
    for (k, img) in images.iter().enumerate() {
        out.csv(&format!("lrt_sim_projection_{k}.csv"), &projection_to_csv(img))?;
        let [u0, v0] = img.pixel_coords(0, 0);
        let [u1, v1] = img.pixel_coords(geometry.nu - 1, geometry.nv - 1);
        let map = HeatMap {
            title: format!("Mean strain along ({:.3}, {:.3}, {:.3})", img.direction[0], img.direction[1], img.direction[2]),
            nx: geometry.nu,
            ny: geometry.nv,
            values: img.average.clone(),
            extent: [u0 * 1e3, u1 * 1e3, v0 * 1e3, v1 * 1e3],
            x_label: "u (mm)".into(),
            y_label: "v (mm)".into(),
        };
        out.svg(&format!("lrt_sim_projection_{k}.svg"), &map.to_svg())?;
        summaries.push(json!({
            "direction": img.direction,
            "u_axis": img.u_axis,
            "v_axis": img.v_axis,
            "hits": img.hit.iter().filter(|h| **h).count(),
            "max_abs_value": img.value.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
            "max_abs_average": img.average.iter().filter(|v| v.is_finite()).fold(0.0_f64, |a, v| a.max(v.abs())),
        }));
    }
    let result = json!({
        "material": material_json(&m),
        "mesh": mesh_header(&mesh),
        "quadrature": value(&quad),
        "detector": value(&geometry),
        "projections": summaries,
    });
    out.report("lrt_sim.json", result, src.warnings)?;
    Ok(summary(&out, &[format!("lrt-sim: {} projections of {}x{} pixels", images.len(), geometry.nu, geometry.nv)]))
}

pub fn link_check(ctx: &Ctx) -> Result<String, CliError> {
    let c = &ctx.cfg.link_check;
    c.validate()?;
    let m = ctx.cfg.material.resolve("inconel_718")?;
    let l = c.half_size_mm / 1e3;
    let p = potential(l, c.z_order, c.plane_terms, &c.coefficients_mpa)?;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for &n in &c.meshes {
        if seen.insert(n) {
            rows.push(lrt::link_check(&p, &m, n, c.contamination_mm / 1e3, c.rays)?);
        }
    }
    let mut warnings = Vec::new();
    for w in rows.windows(2) {
        if w[1].n > w[0].n && w[1].relative_error >= w[0].relative_error {
            warnings.push(format!("error did not decrease from n = {} to n = {}", w[0].n, w[1].n));
        }
    }
    let mut table = vec![format!("{:>6} {:>14} {:>14} {:>14} {:>14}", "n", "rel_error", "rel_error_clean", "contam_effect", "lrt_contam")];
    for r in &rows {
        table.push(format!(
            "{:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.n, r.relative_error, r.relative_error_clean, r.contamination_effect, r.lrt_of_contamination
        ));
    }
    let mut out = ctx.output(Command::LinkCheck, vec![], config_echo(&ctx.cfg.material, "inconel_718", &m, c));
    let mut csv = String::from("n,relative_error,relative_error_clean,contamination_effect,lrt_of_contamination,rays\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.n, r.relative_error, r.relative_error_clean, r.contamination_effect, r.lrt_of_contamination, r.rays
        ));
    }
    out.csv("link_check.csv", &csv)?;
    let logn: Vec<f64> = rows.iter().map(|r| (r.n as f64).log10()).collect();
    let series = vec![
        Series::markers("contaminated", logn.clone(), rows.iter().map(|r| r.relative_error.log10()).collect(), 0),
        Series::line("clean", logn, rows.iter().map(|r| r.relative_error_clean.log10()).collect(), 1),
    ];
    out.svg("link_check.svg", &plot("Reconstruction error under refinement", "log10 n", "log10 relative error", series))?;
    let result = json!({
        "material": material_json(&m),
        "potential": value(&p),
        "rows": value(&rows),
    });
    out.report("link_check.json", result, warnings)?;
    Ok(summary(&out, &table))
}
