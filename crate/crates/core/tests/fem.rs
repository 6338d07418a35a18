use eigenstrain::decomp::{trivial_pipeline, trivial_solution};
use eigenstrain::fem::{forward_solve, helmholtz_decompose, helmholtz_decompose_weighted, BoundaryMode, SolverOptions};
use eigenstrain::grid::{l2_norm, normalized_inner_product};
use eigenstrain::maxwell::MaxwellPotential;
use eigenstrain::{BoxMesh, ElasticModel, GridTensorField, GridVectorField, SymTensor2, Weight};
use proptest::prelude::*;

fn poly_field(c: &[f64]) -> impl Fn([f64; 3]) -> SymTensor2 + Sync + Send + '_ {
    move |p: [f64; 3]| {
        let [x, y, z] = p;
        SymTensor2::new(c[0] + c[1] * x * y, c[2] * z * z, c[3] * x + c[4] * y * z, c[5] * x * z, c[6] * y, c[7] * x * x * y)
            .scale(1e-3)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn forward_solve_is_linear(a in prop::collection::vec(-1.0..1.0f64, 8), b in prop::collection::vec(-1.0..1.0f64, 8), k in -2.0..2.0f64) {
        let m = ElasticModel::inconel_718();
        let mesh = BoxMesh::cube(1.0, 4).unwrap();
        let ea = GridTensorField::from_fn_gauss(&mesh, poly_field(&a));
        let eb = GridTensorField::from_fn_gauss(&mesh, poly_field(&b));
        let sa = forward_solve(&ea, &m, &mesh).unwrap().sigma;
        let sb = forward_solve(&eb, &m, &mesh).unwrap().sigma;
        let sc = forward_solve(&ea.add(&eb.map(|t| t.scale(k))).unwrap(), &m, &mesh).unwrap().sigma;
        let expect = sa.add(&sb.map(|t| t.scale(k))).unwrap();
        let scale = sa.max_abs() + k.abs() * sb.max_abs();
        prop_assert!(sc.sub(&expect).unwrap().max_abs() <= 1e-7 * scale + 1e-6);
    }

    #[test]
    fn decompositions_recompose_and_are_orthogonal(c in prop::collection::vec(-1.0..1.0f64, 8), stiff in any::<bool>()) {
        let m = ElasticModel::tin_bronze();
        let mesh = BoxMesh::new([1.0, 0.8, 0.6], [4, 3, 3]).unwrap();
        let eps = GridTensorField::from_fn_gauss(&mesh, poly_field(&c));
        let w = if stiff { Weight::Stiffness(m) } else { Weight::Identity };
        for mode in [BoundaryMode::ZeroFlux, BoundaryMode::ZeroDisplacement] {
            let d = helmholtz_decompose_weighted(&eps, &mesh, mode, &w, &SolverOptions::default()).unwrap();
            prop_assert!(d.potential.add(&d.solenoidal).unwrap().sub(&eps).unwrap().max_abs() <= 1e-15 * eps.max_abs().max(1e-300) * 4.0);
            let ip = normalized_inner_product(&d.potential, &d.solenoidal, w).unwrap();
            prop_assert!(ip.abs() < 1e-6, "{mode:?}: {ip}");
        }
    }
}

#[test]
fn potential_part_is_stress_free() {
    let m = ElasticModel::inconel_718();
    let mesh = BoxMesh::cube(1.0, 4).unwrap();
    let u = GridVectorField::from_fn(&mesh, |p| [p[0] * p[1], p[2].sin(), p[0] * p[2] * p[2]]);
    let eps = u.symmetric_gradient();
    let d = helmholtz_decompose(&eps, &mesh, BoundaryMode::ZeroFlux).unwrap();
    assert!(d.solenoidal.max_abs() < 1e-8 * eps.max_abs());
    assert!(forward_solve(&eps, &m, &mesh).unwrap().sigma.max_abs() < 1e-8 * m.youngs_modulus() * eps.max_abs());
}

#[test]
fn trivial_pipeline_reproduces_equilibrium_stress() {
    let m = ElasticModel::inconel_718();
    let p = MaxwellPotential::from_coefficients(1.0, 1, 2, &[4e8, 2e8, -3e8, 1e8]).unwrap();
    let sp = p.stress_polys();
    let mut prev = f64::INFINITY;
    for n in [4, 8] {
        let mesh = BoxMesh::cube(1.0, n).unwrap();
        let sigma = GridTensorField::from_fn_gauss(&mesh, |x| sp.eval(x));
        let t = trivial_pipeline(&sigma, &m, &mesh).unwrap();
        let trivial = trivial_solution(&sigma, &m);
        assert!(trivial.sub(&sigma.map(|s| m.apply_compliance(s).scale(-1.0))).unwrap().max_abs() == 0.0);
        let err = l2_norm(&t.sigma_from_trivial.sub(&sigma).unwrap()) / l2_norm(&sigma);
        let err_sol = l2_norm(&t.sigma_from_solenoidal.sub(&sigma).unwrap()) / l2_norm(&sigma);
        assert!((err - err_sol).abs() < 1e-6, "{err} vs {err_sol}");
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 0.05, "{prev}");
}
