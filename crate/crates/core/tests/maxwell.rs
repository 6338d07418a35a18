use eigenstrain::maxwell::{build_symmetric_basis, fit_stress_field, section_grid, MaxwellPotential, StressSampleSet};
use proptest::prelude::*;

const L: f64 = 8.5e-3;

fn coefs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e8..1e8f64, n)
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-L..L)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_is_symmetric_under_x_y_exchange(c in coefs(24), p in point()) {
        let pot = MaxwellPotential::from_coefficients(L, 3, 4, &c).unwrap();
        let a = pot.stress(p);
        let b = pot.stress([p[1], p[0], p[2]]).swap_xy();
        prop_assert!((a - b).max_abs() <= 1e-9 * (a.max_abs() + 1.0));
    }

    #[test]
    fn stress_is_even_in_each_coordinate(c in coefs(24), p in point()) {
        let pot = MaxwellPotential::from_coefficients(L, 3, 4, &c).unwrap();
        let a = pot.stress(p).to_array();
        let b = pot.stress([-p[0], p[1], p[2]]).to_array();
        // xy and xz change sign under x → −x
        let sign = [1.0, 1.0, 1.0, -1.0, 1.0, -1.0];
        for k in 0..6 {
            prop_assert!((a[k] - sign[k] * b[k]).abs() <= 1e-9 * (a[k].abs() + 1.0));
        }
    }

    #[test]
    fn stress_scales_with_coefficients(c in coefs(24), k in -5.0..5.0f64, p in point()) {
        let a = MaxwellPotential::from_coefficients(L, 3, 4, &c).unwrap().stress(p);
        let ck: Vec<f64> = c.iter().map(|v| v * k).collect();
        let b = MaxwellPotential::from_coefficients(L, 3, 4, &ck).unwrap().stress(p);
        prop_assert!((b - a.scale(k)).max_abs() <= 1e-9 * (k.abs() * a.max_abs() + 1.0));
    }

    #[test]
    fn mean_stress_vanishes(c in coefs(4)) {
        let pot = MaxwellPotential::from_coefficients(L, 1, 2, &c).unwrap();
        let sp = pot.stress_polys();
        let smax = (0..6).map(|k| sp.component(k).eval([0.0; 3]).abs()).fold(1.0, f64::max);
        prop_assert!(sp.mean().max_abs() < 1e-10 * smax);
    }
}

#[test]
fn section_fit_is_exact_for_in_basis_fields() {
    let basis = build_symmetric_basis(1, 2, L).unwrap();
    let pot = MaxwellPotential::from_coefficients(L, 1, 2, &[4e8, 2e8, -3e8, 1e8]).unwrap();
    let samples = StressSampleSet::from_potential(&pot, section_grid(L, 1e-3, 8)).unwrap();
    let fit = fit_stress_field(&samples, &basis).unwrap();
    for (a, b) in fit.coefficients.iter().zip([4e8, 2e8, -3e8, 1e8]) {
        approx::assert_relative_eq!(*a, b, max_relative = 1e-9);
    }
}

#[test]
fn default_basis_has_24_members() {
    assert_eq!(build_symmetric_basis(3, 4, L).unwrap().len(), 24);
}
