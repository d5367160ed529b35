use balcert_core::fixtures::five_bus_network;
use balcert_core::powerflow::{solve_fixed_point, FixedPointOptions};
use balcert_core::robustcert::{
    boundary_sample_max, robust_lvur_linebound, robust_lvur_magbound, robust_pvur, sample_oracle,
    vuf_bound, vuf_lgr, vuf_polytope,
};
use balcert_core::solvability::node_phase_disks;
use balcert_core::unbalance::{
    build_quadratic_forms, deviation_rows, lvur, pvur, quadratic, row_values, spread_rows, vuf,
    PvurVariant, VoltageTriple, VufKind,
};
use balcert_core::{build_disks, compute_stress, make_load_state, Complex64, DiskBundle};
use nalgebra::DVector;
use proptest::prelude::*;

fn loads(values: &[(f64, f64)]) -> DVector<Complex64> {
    DVector::from_iterator(values.len(), values.iter().map(|&(p, q)| Complex64::new(p, q)))
}

fn load_vec() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..0.06f64, -0.02..0.03f64), 12)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn bundle() -> impl Strategy<Value = DiskBundle> {
    (
        prop::array::uniform3((0.5..2.5f64, -std::f64::consts::PI..std::f64::consts::PI)),
        prop::array::uniform3(0.0..0.6f64),
    )
        .prop_map(|(polar, radii)| {
            DiskBundle::new(polar.map(|(m, a)| Complex64::from_polar(m, a)), radii).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solved_voltages_lie_in_every_disk(nominal in load_vec(), actual in load_vec(), zero_nominal in any::<bool>()) {
        let model = five_bus_network().unwrap();
        let s0 = if zero_nominal { model.zero_loads() } else { loads(&nominal) * Complex64::new(0.5, 0.0) };
        let state = make_load_state(&model, s0, loads(&actual), None).unwrap();
        let stress = compute_stress(&model, &state).unwrap();
        prop_assume!(stress.feasible);
        let pf = solve_fixed_point(&model, state.actual(), state.nominal_voltage(), &FixedPointOptions::default()).unwrap();
        let (centers, radii) = node_phase_disks(&model, &state, &stress).unwrap();
        for i in 0..centers.len() {
            let d = (pf.voltages[i] - centers[i]).norm();
            prop_assert!(d <= radii[i] * (1.0 + 1e-9) + 1e-12, "entry {i}: {d} > {}", radii[i]);
        }
    }

    #[test]
    fn scaling_load_up_never_lowers_xi(actual in load_vec(), scale in 1.0..3.0f64) {
        let model = five_bus_network().unwrap();
        let s = loads(&actual);
        let small = make_load_state(&model, model.zero_loads(), s.clone(), None).unwrap();
        let big = make_load_state(&model, model.zero_loads(), s * Complex64::new(scale, 0.0), None).unwrap();
        let a = compute_stress(&model, &small).unwrap();
        let b = compute_stress(&model, &big).unwrap();
        for (x, y) in a.xi.iter().zip(&b.xi) {
            prop_assert!(y >= x);
        }
    }

    #[test]
    fn radii_shrink_toward_nominal(nominal in load_vec(), sigma in load_vec()) {
        let model = five_bus_network().unwrap();
        let s0 = loads(&nominal);
        let base = make_load_state(&model, s0.clone(), s0.clone(), None).unwrap();
        let mut previous: Option<[f64; 3]> = None;
        for t in [1.0, 0.75, 0.5, 0.25, 0.0] {
            let state = base.with_actual(&s0 + loads(&sigma) * Complex64::new(t, 0.0)).unwrap();
            let stress = compute_stress(&model, &state).unwrap();
            prop_assume!(stress.feasible);
            let radii = build_disks(&model, &state, &stress, "4").unwrap().radii;
            if let Some(prev) = previous {
                for p in 0..3 {
                    prop_assert!(radii[p] <= prev[p] * (1.0 + 1e-12));
                }
            }
            previous = Some(radii);
        }
        prop_assert_eq!(previous.unwrap(), [0.0; 3]);
    }

    #[test]
    fn vuf_is_rotation_invariant(a in complex(), b in complex(), c in complex(), angle in -3.2..3.2f64) {
        let v = VoltageTriple::new(a, b, c);
        let w = Complex64::from_polar(1.0, angle);
        let rotated = VoltageTriple::new(a * w, b * w, c * w);
        for which in [VufKind::Negative, VufKind::Zero] {
            if let (Ok(x), Ok(y)) = (vuf(v, which), vuf(rotated, which)) {
                prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0));
            }
        }
    }

    #[test]
    fn quadratic_forms_match_sequences(a in complex(), b in complex(), c in complex()) {
        let q = build_quadratic_forms();
        let v = VoltageTriple::new(a, b, c);
        let s = v.sequence();
        let x = v.coords();
        prop_assert!((quadratic(&q.a_n, &x) - 9.0 * s.negative.norm_sqr()).abs() <= 1e-10);
        prop_assert!((quadratic(&q.a_0, &x) - 9.0 * s.zero.norm_sqr()).abs() <= 1e-10);
        prop_assert!((quadratic(&q.a_p, &x) - 9.0 * s.positive.norm_sqr()).abs() <= 1e-10);
    }

    #[test]
    fn row_systems_encode_metrics(x in prop::array::uniform3(0.5..1.5f64), eps in 0.001..0.999f64) {
        let avg_rows = row_values(&deviation_rows(eps), x).iter().all(|v| *v >= 0.0);
        prop_assert_eq!(pvur(x, PvurVariant::AvgDeviation).unwrap() <= eps, avg_rows);
        prop_assert_eq!(lvur(x).unwrap() <= eps, avg_rows);
        let spread = row_values(&spread_rows(eps), x).iter().all(|v| *v >= 0.0);
        prop_assert_eq!(pvur(x, PvurVariant::MaxMinusMin).unwrap() <= eps, spread);
    }

    #[test]
    fn vuf_methods_bracket_samples(d in bundle(), eps in 0.05..0.95f64) {
        let which = VufKind::Negative;
        let sampled = sample_oracle(&d, eps, which, 20_000, 11);
        let poly = vuf_polytope(&d, eps, 8, which).unwrap();
        prop_assert!(poly.f_inner <= poly.f_outer + 1e-12);
        prop_assert!(sampled <= poly.f_outer + 1e-9);
        prop_assert!(poly.f_outer - poly.f_inner <= poly.gap_bound + 1e-9);
        let lgr = vuf_lgr(&d, eps, which).unwrap();
        prop_assert!(sampled <= lgr.gamma + 1e-9 * lgr.gamma.abs().max(1.0));
        let bound = vuf_bound(&d, eps, which).unwrap();
        prop_assert!(sampled <= bound.worst_values[0] + 1e-9);
    }

    #[test]
    fn magnitude_methods_never_exceed_samples(d in bundle(), eps in 0.05..0.95f64) {
        let rows = deviation_rows(eps);
        let pv = robust_pvur(&d, eps, PvurVariant::AvgDeviation).unwrap();
        let ll = robust_lvur_linebound(&d, eps).unwrap();
        let mb = robust_lvur_magbound(&d, eps).unwrap();
        for (k, row) in rows.iter().enumerate() {
            let phase_min = -boundary_sample_max(&d, 4096, 5, |v| {
                -row_values(&[*row; 6], VoltageTriple::from_array(*v).magnitudes())[0]
            });
            let line_min = -boundary_sample_max(&d, 4096, 5, |v| {
                -row_values(&[*row; 6], VoltageTriple::from_array(*v).line_magnitudes())[0]
            });
            prop_assert!(pv.worst_values[k] <= phase_min + 1e-12);
            prop_assert!(ll.worst_values[k] <= line_min + 1e-12);
            prop_assert!(mb.worst_values[k] <= line_min + 1e-12);
        }
    }
}
