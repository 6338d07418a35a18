use eigenstrain::lrt::{boundary_bubble, lrt_integral, lrt_integral_with, ray_family, LrtQuadrature, Ray};
use eigenstrain::{BoxMesh, GridTensorField, GridVectorField, SymTensor2};
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64).prop_filter("nonzero", |d| d.iter().map(|v| v * v).sum::<f64>() > 1e-2)
}

fn smooth(mesh: &BoxMesh, k: f64) -> GridTensorField {
    GridTensorField::from_fn_gauss(mesh, move |p| {
        SymTensor2::new(p[0] * p[1], k * p[2], 1.0 - p[0] * p[0], 0.2, p[1] * p[2], -p[0]).scale(1e-3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_vanishing_potentials_are_invisible(amp in -1e-3..1e-3f64, origin in prop::array::uniform3(-1.0..1.0f64), dir in direction()) {
        let mesh = BoxMesh::new([1.0, 0.7, 0.5], [6, 5, 4]).unwrap();
        let eps = GridVectorField::from_fn(&mesh, boundary_bubble([1.0, 0.7, 0.5], amp)).symmetric_gradient();
        let r = lrt_integral(&eps, &Ray::new(origin, dir).unwrap());
        prop_assert!(r.value.abs() <= 1e-12 * (amp.abs() * r.path_length).max(1e-300) + 1e-18);
    }

    #[test]
    fn integral_is_linear_and_direction_symmetric(k in -2.0..2.0f64, origin in prop::array::uniform3(-0.9..0.9f64), dir in direction()) {
        let mesh = BoxMesh::cube(1.0, 5).unwrap();
        let a = smooth(&mesh, 1.0);
        let b = smooth(&mesh, k);
        let ray = Ray::new(origin, dir).unwrap();
        let back = Ray::new(origin, dir.map(|v| -v)).unwrap();
        let ia = lrt_integral(&a, &ray).value;
        let ib = lrt_integral(&b, &ray).value;
        let isum = lrt_integral(&a.add(&b).unwrap(), &ray).value;
        prop_assert!((isum - ia - ib).abs() <= 1e-12 * (ia.abs() + ib.abs() + 1e-12));
        prop_assert!((lrt_integral(&a, &back).value - ia).abs() <= 1e-12 * (ia.abs() + 1e-12));
    }
}

#[test]
fn missing_rays_report_no_hit() {
    let mesh = BoxMesh::cube(1.0, 2).unwrap();
    let eps = smooth(&mesh, 1.0);
    let r = lrt_integral(&eps, &Ray::new([5.0, 5.0, 0.0], [0.0, 0.0, 1.0]).unwrap());
    assert!(!r.hit);
    assert_eq!(r.value, 0.0);
    assert!(Ray::new([0.0; 3], [0.0; 3]).is_err());
}

#[test]
fn trapezoid_marching_converges_to_exact_rule() {
    let mesh = BoxMesh::cube(1.0, 4).unwrap();
    let eps = smooth(&mesh, 0.5);
    let rays = ray_family(&mesh.spec(), 20);
    let err = |fraction: f64| {
        rays.iter()
            .map(|r| {
                let exact = lrt_integral(&eps, r).value;
                (lrt_integral_with(&eps, r, LrtQuadrature::Trapezoid { fraction }).value - exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(0.5), err(0.125));
    assert!(fine < coarse / 8.0, "{coarse} -> {fine}");
}
