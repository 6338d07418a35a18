//! Writes the synthetic input files in `fixtures/`.
//!
//! Usage: `cargo run -p eigenstrain --example fixtures -- <dir>`

use std::path::PathBuf;

use eigenstrain::axisym::{forward_stress, probe_radius, AxisymForward, AxisymPolyField, LatticeProfile};
use eigenstrain::io::{lattice_to_csv, profile_to_csv, samples_to_csv, tensors_to_csv, write_file};
use eigenstrain::maxwell::{build_symmetric_basis, section_grid, MaxwellPotential, StressSampleSet};
use eigenstrain::{BoxMesh, ElasticModel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::Normal;

fn main() -> eigenstrain::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));

    // probe 2: order-4 polynomial eigenstrain, normalised coefficients
    let radius = probe_radius(2).expect("probe 2");
    let l = 5;
    let scale = |v: [f64; 5]| -> Vec<f64> { v.iter().enumerate().map(|(k, x)| x / radius.powi((l - 1 - k) as i32)).collect() };
    let e = AxisymPolyField::new(
        l,
        radius,
        scale([0.0, 0.0, 2e-3, 0.0, -5e-4]),
        scale([0.0, 0.0, 1e-3, 0.0, -5e-4]),
        scale([0.0, 0.0, 1.5e-3, 0.0, 0.0]),
    )?;
    let bronze = ElasticModel::tin_bronze();
    let r: Vec<f64> = (0..31).map(|k| radius * k as f64 / 30.0).collect();
    let clean = forward_stress(&e, &bronze, &r)?;
    write_file(&dir.join("probe2_profile.csv"), profile_to_csv(&clean).as_bytes())?;

    let mut rng = StdRng::seed_from_u64(7);
    let sd = 0.02 * clean.max_abs();
    let noise = Normal::new(0.0, sd).expect("positive sd");
    let mut noisy = clean.clone();
    for col in [&mut noisy.sigma_rr, &mut noisy.sigma_tt, &mut noisy.sigma_zz] {
        for v in col.iter_mut() {
            *v += rng.sample(noise);
        }
    }
    noisy.uncertainty = Some(std::array::from_fn(|_| vec![sd; r.len()]));
    write_file(&dir.join("probe2_profile_noisy.csv"), profile_to_csv(&noisy).as_bytes())?;

    // lattice spacings with a quadratic d0 drift of 1e-4 relative
    let d_ref = 1.09e-10;
    let fw = AxisymForward::solve(&e, &bronze)?;
    let d0 = |x: f64| d_ref * (1.0 + 1e-4 * (x / radius).powi(2));
    let strain: Vec<[f64; 3]> = r.iter().map(|&x| fw.strain_at(x)).collect();
    let d = |c: usize| -> Vec<f64> { r.iter().zip(&strain).map(|(&x, s)| d0(x) * (1.0 + s[c])).collect() };
    let lat = LatticeProfile::new(r.clone(), d(0), d(1), d(2), None)?;
    write_file(&dir.join("probe2_lattice.csv"), lattice_to_csv(&lat).as_bytes())?;

    // cube: 24-term potential sampled on the 8×8 section grid, 1 mm inset
    let half = 8.5e-3;
    let basis = build_symmetric_basis(3, 4, half)?;
    let coeffs: Vec<f64> = (0..basis.len()).map(|k| 3e8 * ((k as f64 * 0.77).sin()) / (1.0 + k as f64)).collect();
    let p = MaxwellPotential::from_coefficients(half, 3, 4, &coeffs)?;
    let samples = StressSampleSet::from_potential(&p, section_grid(half, 1e-3, 8))?;
    write_file(&dir.join("cube_grid.csv"), samples_to_csv(&samples).as_bytes())?;

    // nodal stress of a small potential on the 8³ mesh, for decompose and lrt-sim
    let small = MaxwellPotential::from_coefficients(half, 1, 2, &[4e8, 2e8, -3e8, 1e8])?;
    let mesh = BoxMesh::cube(half, 8)?;
    let sigma: Vec<_> = mesh.nodes.iter().map(|&x| small.stress(x)).collect();
    write_file(&dir.join("cube_nodes_8.csv"), tensors_to_csv(&mesh.nodes, &sigma, "sigma").as_bytes())?;
    Ok(())
}
