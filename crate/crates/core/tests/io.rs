use eigenstrain::axisym::{AxisymStressProfile, LatticeProfile};
use eigenstrain::io::{format_value, lattice_to_csv, parse_lattice, parse_profile, profile_to_csv, Unit};
use proptest::prelude::*;

// unit shifts of up to ten decades must stay finite
fn finite() -> impl Strategy<Value = f64> {
    (prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL).prop_filter("in range", |x| x.abs() < 1e290)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn unit_text_round_trips_bit_exactly(x in finite()) {
        for unit in [Unit::Millimetre, Unit::Megapascal, Unit::Angstrom] {
            let text = format_value(x, unit);
            prop_assert_eq!(unit.parse_si(&text).unwrap().to_bits(), x.to_bits(), "{}", text);
        }
    }

    #[test]
    fn profile_csv_round_trips(rows in prop::collection::vec((0.0..2.5e-3f64, -1e9..1e9f64, -1e9..1e9f64, -1e9..1e9f64, 1.0..1e8f64), 1..20)) {
        let col = |f: fn(&(f64, f64, f64, f64, f64)) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
        let unc = col(|r| r.4);
        let p = AxisymStressProfile::new(col(|r| r.0), col(|r| r.1), col(|r| r.2), col(|r| r.3), Some([unc.clone(), unc.clone(), unc])).unwrap();
        let q = parse_profile(profile_to_csv(&p).as_bytes(), "test", Some(2.5e-3)).unwrap();
        prop_assert_eq!(&q.r, &p.r);
        prop_assert_eq!(&q.sigma_rr, &p.sigma_rr);
        prop_assert_eq!(&q.sigma_tt, &p.sigma_tt);
        prop_assert_eq!(&q.sigma_zz, &p.sigma_zz);
        prop_assert_eq!(&q.uncertainty, &p.uncertainty);
    }

    #[test]
    fn lattice_csv_round_trips(rows in prop::collection::vec((0.0..2.5e-3f64, 1e-10..2e-10f64, 1e-10..2e-10f64, 1e-10..2e-10f64), 1..20)) {
        let col = |f: fn(&(f64, f64, f64, f64)) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
        let p = LatticeProfile::new(col(|r| r.0), col(|r| r.1), col(|r| r.2), col(|r| r.3), None).unwrap();
        let q = parse_lattice(lattice_to_csv(&p).as_bytes(), "test", None).unwrap();
        prop_assert_eq!(&q.d_rr, &p.d_rr);
        prop_assert_eq!(&q.d_tt, &p.d_tt);
        prop_assert_eq!(&q.d_zz, &p.d_zz);
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let csv = "r_mm,sigma_rr_MPa,sigma_tt_MPa,sigma_zz_MPa\n0,1,2,3\n1,2,x,4\n";
    let err = parse_profile(csv.as_bytes(), "bad.csv", None).unwrap_err().to_string();
    assert!(err.contains("bad.csv") && err.contains('3'), "{err}");
}

#[test]
fn missing_columns_are_rejected() {
    assert!(parse_profile(b"r_mm,sigma_rr_MPa\n0,1\n", "x", None).is_err());
}
